#pragma once

#include <array>
#include <functional>
#include <cstddef>
#include <span>
#include <vector>

#include "adeb/field.hpp"

namespace adeb {

struct Block {
  std::array<std::size_t, 3> origin{};
  Dims3 extent;
};

// Block decomposition of a grid. Blocks are ordered x-major over block
// coordinates, matching the row-major cell order.
struct PartitionSet {
  Dims3 field_dims;
  Dims3 block_dims;
  Dims3 grid;  // blocks per axis
  std::vector<Block> blocks;

  std::size_t count() const { return blocks.size(); }
};

PartitionSet partition_field(const Dims3& field_dims, const Dims3& block_dims);
inline PartitionSet partition_field(const Field3D& field, const Dims3& block_dims) {
  return partition_field(field.dims(), block_dims);
}

// Copies one block out of a row-major grid (block-local row-major order).
std::vector<float> extract_block(std::span<const float> grid, const Dims3& grid_dims, const Block& block);
void insert_block(std::span<float> grid, const Dims3& grid_dims, const Block& block, std::span<const float> values);

// Invokes fn(block_index) for every block, sequentially when threads <= 1.
// Output must not depend on the thread count.
void for_each_block(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace adeb

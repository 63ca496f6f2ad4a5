#include "adeb/partition.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "adeb/error.hpp"

namespace adeb {

PartitionSet partition_field(const Dims3& field_dims, const Dims3& block_dims) {
  for (int axis = 0; axis < 3; ++axis) {
    if (block_dims[axis] == 0) throw ArgumentError("block dims must be positive");
    if (block_dims[axis] > field_dims[axis]) {
      throw ArgumentError("block dims " + to_string(block_dims) + " exceed field dims " + to_string(field_dims));
    }
  }
  PartitionSet set;
  set.field_dims = field_dims;
  set.block_dims = block_dims;
  auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
  set.grid = {ceil_div(field_dims.nx, block_dims.nx), ceil_div(field_dims.ny, block_dims.ny),
              ceil_div(field_dims.nz, block_dims.nz)};
  set.blocks.reserve(set.grid.cells());
  for (std::size_t bx = 0; bx < set.grid.nx; ++bx) {
    for (std::size_t by = 0; by < set.grid.ny; ++by) {
      for (std::size_t bz = 0; bz < set.grid.nz; ++bz) {
        Block b;
        b.origin = {bx * block_dims.nx, by * block_dims.ny, bz * block_dims.nz};
        b.extent = {std::min(block_dims.nx, field_dims.nx - b.origin[0]),
                    std::min(block_dims.ny, field_dims.ny - b.origin[1]),
                    std::min(block_dims.nz, field_dims.nz - b.origin[2])};
        set.blocks.push_back(b);
      }
    }
  }
  return set;
}

std::vector<float> extract_block(std::span<const float> grid, const Dims3& grid_dims, const Block& block) {
  std::vector<float> out(block.extent.cells());
  auto it = out.begin();
  for (std::size_t x = 0; x < block.extent.nx; ++x) {
    for (std::size_t y = 0; y < block.extent.ny; ++y) {
      const auto start = grid_dims.index(block.origin[0] + x, block.origin[1] + y, block.origin[2]);
      it = std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(start), block.extent.nz, it);
    }
  }
  return out;
}

void insert_block(std::span<float> grid, const Dims3& grid_dims, const Block& block, std::span<const float> values) {
  if (values.size() != block.extent.cells()) throw ArgumentError("block value count does not match extent");
  auto it = values.begin();
  for (std::size_t x = 0; x < block.extent.nx; ++x) {
    for (std::size_t y = 0; y < block.extent.ny; ++y) {
      const auto start = grid_dims.index(block.origin[0] + x, block.origin[1] + y, block.origin[2]);
      std::copy_n(it, block.extent.nz, grid.begin() + static_cast<std::ptrdiff_t>(start));
      it += static_cast<std::ptrdiff_t>(block.extent.nz);
    }
  }
}

void for_each_block(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const auto n = std::min<std::size_t>(threads, count);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (auto i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace adeb

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adeb/field.hpp"
#include "adeb/partition.hpp"

namespace adeb {

inline constexpr double kDefaultBoundaryThreshold = 88.16;

struct PartitionFeatures {
  std::size_t partition_id = 0;
  double mean = 0.0;  // mean of |value|
  std::size_t cell_count = 0;
  // Cells in (t_boundary - eb_ref, t_boundary + eb_ref) at eb_ref (default 1).
  double n_ref = 0.0;
};

// One pass per block; results are identical for any thread count.
std::vector<PartitionFeatures> extract_features(const PartitionSet& pset, const Field3D& field,
                                                double t_boundary = kDefaultBoundaryThreshold,
                                                double eb_ref = 1.0, unsigned threads = 1);

// Cell-count-weighted mean of partition means.
double global_mean(std::span<const PartitionFeatures> features);

}  // namespace adeb

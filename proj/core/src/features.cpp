#include "adeb/features.hpp"

#include <cmath>

#include "adeb/error.hpp"

namespace adeb {

std::vector<PartitionFeatures> extract_features(const PartitionSet& pset, const Field3D& field,
                                                double t_boundary, double eb_ref, unsigned threads) {
  if (!(eb_ref > 0.0)) throw ArgumentError("eb_ref must be positive");
  if (pset.field_dims != field.dims()) throw ArgumentError("partition set does not match field dims");
  const double lo = t_boundary - eb_ref;
  const double hi = t_boundary + eb_ref;
  const auto values = field.values();
  const auto& dims = field.dims();

  std::vector<PartitionFeatures> out(pset.count());
  for_each_block(pset.count(), threads, [&](std::size_t id) {
    const auto& block = pset.blocks[id];
    double sum = 0.0;
    std::size_t boundary = 0;
    for (std::size_t x = 0; x < block.extent.nx; ++x) {
      for (std::size_t y = 0; y < block.extent.ny; ++y) {
        const float* row = values.data() + dims.index(block.origin[0] + x, block.origin[1] + y, block.origin[2]);
        for (std::size_t z = 0; z < block.extent.nz; ++z) {
          const double v = row[z];
          sum += std::fabs(v);
          boundary += (v > lo && v < hi) ? 1 : 0;
        }
      }
    }
    const auto n = block.extent.cells();
    out[id] = {id, sum / static_cast<double>(n), n, static_cast<double>(boundary)};
  });
  return out;
}

double global_mean(std::span<const PartitionFeatures> features) {
  if (features.empty()) throw ArgumentError("global_mean of an empty feature list");
  // Neumaier summation keeps the result independent of reduction order to ~1e-16.
  double sum = 0.0, comp = 0.0;
  std::size_t cells = 0;
  for (const auto& f : features) {
    const double term = f.mean * static_cast<double>(f.cell_count);
    const double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    cells += f.cell_count;
  }
  if (cells == 0) throw ArgumentError("global_mean over zero cells");
  return (sum + comp) / static_cast<double>(cells);
}

}  // namespace adeb

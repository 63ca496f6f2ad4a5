#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "adeb/field.hpp"
#include "adeb/huffman.hpp"

namespace adeb {

inline constexpr std::int32_t kQuantizationRadius = 1 << 15;

struct Outlier {
  std::uint32_t index = 0;
  float value = 0.0f;
  friend bool operator==(const Outlier&, const Outlier&) = default;
};

// One partition compressed under an absolute error bound. The first cell is
// always stored as an outlier so constant blocks reconstruct exactly.
struct CompressedBlock {
  double eb = 0.0;
  Dims3 dims;
  HuffmanCode codebook;
  std::vector<std::uint8_t> payload;
  std::uint64_t payload_bits = 0;
  std::vector<Outlier> outliers;

  // Bits of the full serialized record (header, codebook, payload, outliers).
  std::uint64_t encoded_bits() const;
};

// Lorenzo prediction over previously reconstructed cells (zero outside the
// block), q = round((v - pred) / 2eb), Huffman coding with zero-run symbols.
CompressedBlock compress_block(std::span<const float> values, const Dims3& dims, double eb);
std::vector<float> decompress_block(const CompressedBlock& block);

// Wire format "ADB1": eb f64, dims 3 x u32, outlier count u32, payload bit
// length u64, crc32 u32, codebook, payload bytes, outliers (u32 index, f32).
// The checksum covers every byte except its own field.
std::vector<std::uint8_t> serialize_block(const CompressedBlock& block);
CompressedBlock deserialize_block(std::span<const std::uint8_t> bytes);

// Bits per value including every stream overhead.
double measure_bitrate(const CompressedBlock& block);
inline double compression_ratio(double bitrate) { return 32.0 / bitrate; }

// Quantization codes the compressor emits (outliers reported as INT32_MIN).
std::vector<std::int32_t> quantization_codes(std::span<const float> values, const Dims3& dims, double eb);

struct ErrorHistogram {
  double eb = 0.0;
  std::vector<std::uint64_t> counts;  // uniform bins over [-eb, eb]

  std::uint64_t total() const;
  double bin_center(std::size_t i) const;
  // Pearson chi-square statistic against the uniform distribution.
  double chi_square_uniform() const;
};

// Histogram of recon - orig; an error outside [-eb, eb] throws InvariantViolation.
ErrorHistogram error_histogram(std::span<const float> orig, std::span<const float> recon, double eb,
                               std::size_t bins = 100);

}  // namespace adeb

#include "adeb/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <climits>
#include <cmath>

#include "adeb/bytes.hpp"
#include "adeb/error.hpp"

namespace adeb {

namespace {

constexpr std::array<std::uint8_t, 4> kBlockMagic{'A', 'D', 'B', '1'};
constexpr std::size_t kChecksumOffset = 4 + 8 + 12 + 4 + 8;
constexpr std::size_t kHeaderBytes = kChecksumOffset + 4;

// Symbol layout: escape, zero-run classes, then zigzagged nonzero codes.
constexpr std::uint32_t kEscape = 0;
constexpr std::uint32_t kRunClasses = 48;
constexpr std::uint32_t kRunBase = 1;
constexpr std::uint32_t kValueBase = kRunBase + kRunClasses;
constexpr std::uint32_t kAlphabetSize = kValueBase + 2 * static_cast<std::uint32_t>(kQuantizationRadius);
constexpr std::int32_t kOutlierCode = INT32_MIN;

std::uint32_t zigzag(std::int32_t q) {
  return (static_cast<std::uint32_t>(q) << 1) ^ static_cast<std::uint32_t>(q >> 31);
}
std::int32_t unzigzag(std::uint32_t z) { return static_cast<std::int32_t>((z >> 1) ^ (~(z & 1) + 1)); }

// First-order 3-D Lorenzo predictor on reconstructed values.
struct Lorenzo {
  const float* r;
  std::size_t sy, sx;  // strides of y and x

  double operator()(std::size_t x, std::size_t y, std::size_t z, std::size_t idx) const {
    auto at = [&](bool ok, std::size_t off) -> double { return ok ? static_cast<double>(r[idx - off]) : 0.0; };
    const bool bx = x > 0, by = y > 0, bz = z > 0;
    return at(bx, sx) + at(by, sy) + at(bz, 1) - at(bx && by, sx + sy) - at(bx && bz, sx + 1) -
           at(by && bz, sy + 1) + at(bx && by && bz, sx + sy + 1);
  }
};

// Quantizes one cell; returns kOutlierCode when it must be stored verbatim.
std::int32_t quantize(float value, double pred, double eb, float& recon) {
  const double v = value;
  const double scaled = (v - pred) / (2.0 * eb);
  if (!(std::fabs(scaled) < static_cast<double>(kQuantizationRadius) - 0.5)) {
    recon = value;
    return kOutlierCode;
  }
  const auto q = static_cast<std::int32_t>(std::nearbyint(scaled));
  const float r = static_cast<float>(pred + 2.0 * eb * q);
  if (!(std::fabs(static_cast<double>(r) - v) <= eb)) {
    recon = value;
    return kOutlierCode;
  }
  recon = r;
  return q;
}

std::vector<std::int32_t> quantize_block(std::span<const float> values, const Dims3& dims, double eb,
                                         std::vector<Outlier>* outliers) {
  if (!(eb > 0.0) || !std::isfinite(eb)) throw ArgumentError("error bound must be positive and finite");
  if (values.size() != dims.cells() || values.empty()) throw ArgumentError("block values do not match dims");
  if (values.size() > UINT32_MAX) throw ArgumentError("block too large for 32-bit outlier indices");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ArgumentError("non-finite value at cell " + std::to_string(i));
  }
  std::vector<float> recon(values.size());
  std::vector<std::int32_t> codes(values.size());
  const Lorenzo predict{recon.data(), dims.nz, dims.ny * dims.nz};
  std::size_t idx = 0;
  for (std::size_t x = 0; x < dims.nx; ++x) {
    for (std::size_t y = 0; y < dims.ny; ++y) {
      for (std::size_t z = 0; z < dims.nz; ++z, ++idx) {
        std::int32_t q = kOutlierCode;
        if (idx == 0) {
          recon[0] = values[0];
        } else {
          q = quantize(values[idx], predict(x, y, z, idx), eb, recon[idx]);
        }
        codes[idx] = q;
        if (q == kOutlierCode && outliers) outliers->push_back({static_cast<std::uint32_t>(idx), values[idx]});
      }
    }
  }
  return codes;
}

unsigned run_class(std::uint64_t run) { return static_cast<unsigned>(std::bit_width(run) - 1); }

template <typename Sink>
void for_each_symbol(const std::vector<std::int32_t>& codes, Sink&& sink) {
  std::size_t i = 0;
  while (i < codes.size()) {
    if (codes[i] == 0) {
      std::size_t j = i;
      while (j < codes.size() && codes[j] == 0) ++j;
      const std::uint64_t run = j - i;
      const unsigned k = run_class(run);
      sink(kRunBase + k, run - (std::uint64_t{1} << k), k);
      i = j;
    } else if (codes[i] == kOutlierCode) {
      sink(kEscape, 0, 0);
      ++i;
    } else {
      sink(kValueBase + zigzag(codes[i]) - 1, 0, 0);
      ++i;
    }
  }
}

std::vector<std::uint8_t> header_and_body(const CompressedBlock& block) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + block.payload.size() + 8 * block.outliers.size() + 256);
  out.insert(out.end(), kBlockMagic.begin(), kBlockMagic.end());
  bytes::put(out, block.eb);
  for (int axis = 0; axis < 3; ++axis) bytes::put(out, static_cast<std::uint32_t>(block.dims[axis]));
  bytes::put(out, static_cast<std::uint32_t>(block.outliers.size()));
  bytes::put(out, block.payload_bits);
  bytes::put(out, std::uint32_t{0});  // checksum placeholder
  block.codebook.serialize(out);
  bytes::put_bytes(out, block.payload);
  for (const auto& o : block.outliers) {
    bytes::put(out, o.index);
    bytes::put(out, o.value);
  }
  return out;
}

std::uint32_t checksum_of(std::span<const std::uint8_t> record) {
  auto crc = bytes::crc32(record.first(kChecksumOffset));
  return bytes::crc32(record.subspan(kHeaderBytes), crc);
}

}  // namespace

std::vector<std::int32_t> quantization_codes(std::span<const float> values, const Dims3& dims, double eb) {
  return quantize_block(values, dims, eb, nullptr);
}

CompressedBlock compress_block(std::span<const float> values, const Dims3& dims, double eb) {
  CompressedBlock block;
  block.eb = eb;
  block.dims = dims;
  const auto codes = quantize_block(values, dims, eb, &block.outliers);

  std::vector<std::uint64_t> freqs(kAlphabetSize, 0);
  for_each_symbol(codes, [&](std::uint32_t sym, std::uint64_t, unsigned) { ++freqs[sym]; });
  block.codebook = HuffmanCode::from_frequencies(freqs);

  BitWriter writer;
  for_each_symbol(codes, [&](std::uint32_t sym, std::uint64_t extra, unsigned nextra) {
    block.codebook.encode(writer, sym);
    if (nextra) writer.write(extra, nextra);
  });
  block.payload_bits = writer.bit_count();
  block.payload = std::move(writer).take();
  return block;
}

std::vector<float> decompress_block(const CompressedBlock& block) {
  const auto& dims = block.dims;
  const std::size_t n = dims.cells();
  if (n == 0 || !(block.eb > 0.0) || !std::isfinite(block.eb)) throw DecodeError("malformed block header");
  if (block.codebook.alphabet_size() != kAlphabetSize) throw DecodeError("codebook alphabet mismatch");

  // Expand the symbol stream back into per-cell codes.
  std::vector<std::int32_t> codes;
  codes.reserve(n);
  BitReader reader(block.payload, block.payload_bits);
  while (codes.size() < n) {
    const auto sym = block.codebook.decode(reader);
    if (sym == kEscape) {
      codes.push_back(kOutlierCode);
    } else if (sym < kValueBase) {
      const unsigned k = sym - kRunBase;
      const std::uint64_t run = (std::uint64_t{1} << k) + reader.read(k);
      if (run > n - codes.size()) throw DecodeError("zero run overruns the block");
      codes.insert(codes.end(), run, 0);
    } else {
      codes.push_back(unzigzag(sym - kValueBase + 1));
    }
  }
  if (reader.position() != reader.limit()) throw DecodeError("trailing bits in payload");
  if (codes[0] != kOutlierCode) throw DecodeError("first cell must be an outlier");

  std::vector<float> recon(n);
  const Lorenzo predict{recon.data(), dims.nz, dims.ny * dims.nz};
  std::size_t next_outlier = 0;
  std::size_t idx = 0;
  for (std::size_t x = 0; x < dims.nx; ++x) {
    for (std::size_t y = 0; y < dims.ny; ++y) {
      for (std::size_t z = 0; z < dims.nz; ++z, ++idx) {
        if (codes[idx] == kOutlierCode) {
          if (next_outlier >= block.outliers.size() || block.outliers[next_outlier].index != idx) {
            throw DecodeError("outlier table does not match the payload at cell " + std::to_string(idx));
          }
          recon[idx] = block.outliers[next_outlier++].value;
        } else {
          recon[idx] = static_cast<float>(predict(x, y, z, idx) + 2.0 * block.eb * codes[idx]);
        }
      }
    }
  }
  if (next_outlier != block.outliers.size()) throw DecodeError("unused outlier records");
  return recon;
}

std::vector<std::uint8_t> serialize_block(const CompressedBlock& block) {
  auto out = header_and_body(block);
  const auto crc = checksum_of(out);
  std::memcpy(out.data() + kChecksumOffset, &crc, sizeof(crc));
  return out;
}

CompressedBlock deserialize_block(std::span<const std::uint8_t> data) {
  if (data.size() < kHeaderBytes || !std::equal(kBlockMagic.begin(), kBlockMagic.end(), data.begin())) {
    throw DecodeError("bad block magic (expected ADB1)");
  }
  bytes::Reader<DecodeError> in(data);
  in.take(4);
  CompressedBlock block;
  block.eb = in.get<double>();
  block.dims = {in.get<std::uint32_t>(), in.get<std::uint32_t>(), in.get<std::uint32_t>()};
  const auto n_outliers = in.get<std::uint32_t>();
  block.payload_bits = in.get<std::uint64_t>();
  const auto stored_crc = in.get<std::uint32_t>();
  if (stored_crc != checksum_of(data)) throw DecodeError("block checksum mismatch");
  if (block.dims.cells() == 0) throw DecodeError("block declares an empty grid");
  if (n_outliers > block.dims.cells()) throw DecodeError("outlier count exceeds cell count");

  block.codebook = HuffmanCode::deserialize(in, kAlphabetSize);
  const auto payload_bytes = (block.payload_bits + 7) / 8;
  if (payload_bytes > in.remaining()) throw DecodeError("truncated payload");
  const auto payload = in.take(payload_bytes);
  block.payload.assign(payload.begin(), payload.end());
  block.outliers.resize(n_outliers);
  for (auto& o : block.outliers) {
    o.index = in.get<std::uint32_t>();
    o.value = in.get<float>();
  }
  if (in.remaining() != 0) throw DecodeError("trailing bytes after block record");
  return block;
}

std::uint64_t CompressedBlock::encoded_bits() const {
  std::vector<std::uint8_t> book;
  codebook.serialize(book);
  return 8 * (kHeaderBytes + book.size() + payload.size() + outliers.size() * (sizeof(std::uint32_t) + sizeof(float)));
}

double measure_bitrate(const CompressedBlock& block) {
  return static_cast<double>(block.encoded_bits()) / static_cast<double>(block.dims.cells());
}

std::uint64_t ErrorHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double ErrorHistogram::bin_center(std::size_t i) const {
  const double width = 2.0 * eb / static_cast<double>(counts.size());
  return -eb + (static_cast<double>(i) + 0.5) * width;
}

double ErrorHistogram::chi_square_uniform() const {
  const double expected = static_cast<double>(total()) / static_cast<double>(counts.size());
  if (expected <= 0.0) return 0.0;
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

ErrorHistogram error_histogram(std::span<const float> orig, std::span<const float> recon, double eb,
                               std::size_t bins) {
  if (orig.size() != recon.size()) throw ArgumentError("error_histogram: shape mismatch");
  if (bins == 0 || !(eb > 0.0)) throw ArgumentError("error_histogram: need bins > 0 and eb > 0");
  ErrorHistogram h{eb, std::vector<std::uint64_t>(bins, 0)};
  const double scale = static_cast<double>(bins) / (2.0 * eb);
  for (std::size_t i = 0; i < orig.size(); ++i) {
    const double e = static_cast<double>(recon[i]) - static_cast<double>(orig[i]);
    if (!(std::fabs(e) <= eb)) {
      throw InvariantViolation("reconstruction error " + std::to_string(e) + " exceeds bound " +
                               std::to_string(eb) + " at cell " + std::to_string(i));
    }
    auto bin = static_cast<std::size_t>(std::floor((e + eb) * scale));
    h.counts[std::min(bin, bins - 1)]++;
  }
  return h;
}

}  // namespace adeb

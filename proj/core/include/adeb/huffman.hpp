#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adeb/bitstream.hpp"
#include "adeb/bytes.hpp"

namespace adeb {

// Canonical Huffman code over a dense alphabet [0, alphabet_size).
// Code lengths are capped at kMaxCodeLength.
class HuffmanCode {
 public:
  static constexpr unsigned kMaxCodeLength = 32;

  HuffmanCode() = default;

  // Symbols with zero frequency get no code. At least one symbol must be used;
  // a lone symbol gets a 1-bit code.
  static HuffmanCode from_frequencies(std::span<const std::uint64_t> freqs);
  static HuffmanCode from_lengths(std::vector<std::uint8_t> lengths);

  void encode(BitWriter& out, std::uint32_t symbol) const;
  std::uint32_t decode(BitReader& in) const;

  // Serialized as: max length byte, per-length counts (varints), then the
  // symbols of each length in ascending order as varint deltas.
  void serialize(std::vector<std::uint8_t>& out) const;
  static HuffmanCode deserialize(bytes::Reader<DecodeError>& in, std::size_t alphabet_size);

  const std::vector<std::uint8_t>& lengths() const { return lengths_; }
  std::size_t alphabet_size() const { return lengths_.size(); }

 private:
  void assign_codes();

  std::vector<std::uint8_t> lengths_;   // per symbol, 0 = unused
  std::vector<std::uint32_t> codes_;    // per symbol
  std::vector<std::uint32_t> sorted_;   // symbols in canonical order
  std::vector<std::uint32_t> count_;    // per length
  std::vector<std::uint32_t> first_;    // first canonical code per length
  std::vector<std::uint32_t> offset_;   // index into sorted_ per length
  unsigned max_length_ = 0;
};

// Code lengths for the given frequencies, limited to max_length.
std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs,
                                               unsigned max_length = HuffmanCode::kMaxCodeLength);

}  // namespace adeb

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adeb/error.hpp"

namespace adeb {

// MSB-first bit packing.
class BitWriter {
 public:
  void write(std::uint64_t value, unsigned nbits) {
    for (unsigned i = nbits; i-- > 0;) put_bit((value >> i) & 1u);
  }
  void put_bit(unsigned bit) {
    if ((bits_ & 7u) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7u));
    ++bits_;
  }
  std::uint64_t bit_count() const { return bits_; }
  std::vector<std::uint8_t> take() && { return std::move(bytes_); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t nbits) : bytes_(bytes), limit_(nbits) {
    if (nbits > static_cast<std::uint64_t>(bytes.size()) * 8) throw DecodeError("bit length exceeds payload");
  }
  unsigned get_bit() {
    if (pos_ >= limit_) throw DecodeError("payload exhausted");
    const unsigned bit = (bytes_[pos_ >> 3] >> (7u - (pos_ & 7u))) & 1u;
    ++pos_;
    return bit;
  }
  std::uint64_t read(unsigned nbits) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < nbits; ++i) v = (v << 1) | get_bit();
    return v;
  }
  std::uint64_t position() const { return pos_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t limit_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace adeb

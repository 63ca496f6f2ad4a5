#include "adeb/huffman.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <tuple>

#include "adeb/error.hpp"

namespace adeb {

namespace {

// Depth of every used symbol in a Huffman tree built over freqs (all > 0).
std::vector<std::uint8_t> tree_depths(const std::vector<std::uint64_t>& freqs) {
  const std::size_t n = freqs.size();
  if (n == 1) return {1};
  // Nodes [0, n) are leaves; internal nodes are appended.
  std::vector<std::uint32_t> parent(2 * n - 1, 0);
  using Item = std::pair<std::uint64_t, std::uint32_t>;  // (weight, node) ties broken by node id
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::uint32_t i = 0; i < n; ++i) heap.emplace(freqs[i], i);
  std::uint32_t next = static_cast<std::uint32_t>(n);
  while (heap.size() > 1) {
    const auto [wa, a] = heap.top();
    heap.pop();
    const auto [wb, b] = heap.top();
    heap.pop();
    parent[a] = parent[b] = next;
    heap.emplace(wa + wb, next++);
  }
  const std::uint32_t root = next - 1;
  std::vector<std::uint32_t> depth(2 * n - 1, 0);
  for (std::uint32_t node = root; node-- > 0;) depth[node] = depth[parent[node]] + 1;
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>(depth[i], 255));
  return out;
}

}  // namespace

std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs, unsigned max_length) {
  std::vector<std::uint32_t> used;
  std::vector<std::uint64_t> w;
  for (std::uint32_t s = 0; s < freqs.size(); ++s) {
    if (freqs[s] > 0) {
      used.push_back(s);
      w.push_back(freqs[s]);
    }
  }
  if (used.empty()) throw ArgumentError("Huffman code needs at least one used symbol");
  if (used.size() > (std::uint64_t{1} << std::min(max_length, 63u))) {
    throw ArgumentError("alphabet too large for the code length limit");
  }
  // Flatten the distribution until the tree fits the length limit.
  auto depths = tree_depths(w);
  while (*std::max_element(depths.begin(), depths.end()) > max_length) {
    for (auto& x : w) x = (x + 1) / 2;
    depths = tree_depths(w);
  }
  std::vector<std::uint8_t> lengths(freqs.size(), 0);
  for (std::size_t i = 0; i < used.size(); ++i) lengths[used[i]] = depths[i];
  return lengths;
}

HuffmanCode HuffmanCode::from_frequencies(std::span<const std::uint64_t> freqs) {
  return from_lengths(huffman_code_lengths(freqs));
}

HuffmanCode HuffmanCode::from_lengths(std::vector<std::uint8_t> lengths) {
  HuffmanCode code;
  code.lengths_ = std::move(lengths);
  code.assign_codes();
  return code;
}

void HuffmanCode::assign_codes() {
  max_length_ = 0;
  for (auto l : lengths_) {
    if (l > kMaxCodeLength) throw DecodeError("code length exceeds limit");
    max_length_ = std::max<unsigned>(max_length_, l);
  }
  if (max_length_ == 0) throw DecodeError("empty Huffman code");
  count_.assign(max_length_ + 1, 0);
  for (auto l : lengths_) {
    if (l) ++count_[l];
  }
  // Kraft inequality must hold, otherwise codes collide.
  std::uint64_t kraft = 0;
  for (unsigned l = 1; l <= max_length_; ++l) kraft += std::uint64_t{count_[l]} << (max_length_ - l);
  if (kraft > (std::uint64_t{1} << max_length_)) throw DecodeError("code lengths violate the Kraft inequality");

  first_.assign(max_length_ + 1, 0);
  offset_.assign(max_length_ + 1, 0);
  for (unsigned l = 2; l <= max_length_; ++l) offset_[l] = offset_[l - 1] + count_[l - 1];
  sorted_.assign(std::accumulate(count_.begin(), count_.end(), std::size_t{0}), 0);
  {
    auto fill = offset_;
    for (std::uint32_t s = 0; s < lengths_.size(); ++s) {
      if (lengths_[s]) sorted_[fill[lengths_[s]]++] = s;
    }
  }
  codes_.assign(lengths_.size(), 0);
  std::uint64_t code = 0;
  std::uint32_t index = 0;
  for (unsigned l = 1; l <= max_length_; ++l) {
    code <<= 1;
    first_[l] = static_cast<std::uint32_t>(code);
    for (std::uint32_t i = 0; i < count_[l]; ++i) codes_[sorted_[index + i]] = static_cast<std::uint32_t>(code + i);
    code += count_[l];
    index += count_[l];
  }
}

void HuffmanCode::encode(BitWriter& out, std::uint32_t symbol) const {
  const auto len = symbol < lengths_.size() ? lengths_[symbol] : 0;
  if (len == 0) throw ArgumentError("symbol " + std::to_string(symbol) + " has no code");
  out.write(codes_[symbol], len);
}

std::uint32_t HuffmanCode::decode(BitReader& in) const {
  std::uint64_t code = 0;
  for (unsigned l = 1; l <= max_length_; ++l) {
    code = (code << 1) | in.get_bit();
    const std::uint64_t rel = code - first_[l];
    if (code >= first_[l] && rel < count_[l]) return sorted_[offset_[l] + rel];
  }
  throw DecodeError("invalid Huffman code in payload");
}

void HuffmanCode::serialize(std::vector<std::uint8_t>& out) const {
  out.push_back(static_cast<std::uint8_t>(max_length_));
  for (unsigned l = 1; l <= max_length_; ++l) bytes::put_varint(out, count_[l]);
  std::size_t index = 0;
  for (unsigned l = 1; l <= max_length_; ++l) {
    std::uint32_t prev = 0;
    for (std::uint32_t i = 0; i < count_[l]; ++i, ++index) {
      bytes::put_varint(out, sorted_[index] - prev);
      prev = sorted_[index];
    }
  }
}

HuffmanCode HuffmanCode::deserialize(bytes::Reader<DecodeError>& in, std::size_t alphabet_size) {
  const unsigned max_len = in.get<std::uint8_t>();
  if (max_len == 0 || max_len > kMaxCodeLength) throw DecodeError("bad codebook max length");
  std::vector<std::uint64_t> counts(max_len + 1, 0);
  std::uint64_t total = 0;
  for (unsigned l = 1; l <= max_len; ++l) {
    counts[l] = in.get_varint();
    total += counts[l];
    if (total > alphabet_size) throw DecodeError("codebook lists more symbols than the alphabet");
  }
  std::vector<std::uint8_t> lengths(alphabet_size, 0);
  for (unsigned l = 1; l <= max_len; ++l) {
    std::uint64_t prev = 0;
    for (std::uint64_t i = 0; i < counts[l]; ++i) {
      const auto delta = in.get_varint();
      const auto symbol = prev + delta;
      if ((i > 0 && delta == 0) || symbol >= alphabet_size || lengths[symbol] != 0) {
        throw DecodeError("malformed codebook symbol list");
      }
      lengths[symbol] = static_cast<std::uint8_t>(l);
      prev = symbol;
    }
  }
  return from_lengths(std::move(lengths));
}

}  // namespace adeb

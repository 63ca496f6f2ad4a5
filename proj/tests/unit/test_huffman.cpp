#include <adeb/bitstream.hpp>
#include <adeb/error.hpp>
#include <adeb/huffman.hpp>

#include <gtest/gtest.h>

#include <queue>
#include <random>

using namespace adeb;

namespace {

// Cost of an optimal prefix code, computed by the textbook merge.
std::uint64_t optimal_cost(const std::vector<std::uint64_t>& freqs) {
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> q;
  for (auto f : freqs)
    if (f) q.push(f);
  if (q.size() == 1) return q.top();
  std::uint64_t cost = 0;
  while (q.size() > 1) {
    auto a = q.top();
    q.pop();
    auto b = q.top();
    q.pop();
    cost += a + b;
    q.push(a + b);
  }
  return cost;
}

double kraft_sum(const std::vector<std::uint8_t>& lengths) {
  double s = 0.0;
  for (auto l : lengths)
    if (l) s += std::ldexp(1.0, -static_cast<int>(l));
  return s;
}

}  // namespace

TEST(Huffman, RoundTripRandomMessage) {
  std::mt19937_64 rng(1);
  std::geometric_distribution<std::uint32_t> geo(0.2);
  std::vector<std::uint32_t> msg(20000);
  std::vector<std::uint64_t> freqs(300, 0);
  for (auto& s : msg) {
    s = std::min<std::uint32_t>(geo(rng), 299);
    ++freqs[s];
  }
  auto code = HuffmanCode::from_frequencies(freqs);
  BitWriter w;
  for (auto s : msg) code.encode(w, s);
  const auto bits = w.bit_count();
  auto bytes = std::move(w).take();
  BitReader r(bytes, bits);
  for (auto s : msg) ASSERT_EQ(code.decode(r), s);
  EXPECT_EQ(r.position(), bits);
}

TEST(Huffman, OptimalWhenUncapped) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> n(2, 200);
    std::uniform_int_distribution<std::uint64_t> f(0, 10000);
    std::vector<std::uint64_t> freqs(n(rng));
    for (auto& x : freqs) x = f(rng);
    freqs[0] = std::max<std::uint64_t>(freqs[0], 1);
    freqs[1] = std::max<std::uint64_t>(freqs[1], 1);
    auto lengths = huffman_code_lengths(freqs);
    std::uint64_t cost = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) cost += freqs[i] * lengths[i];
    EXPECT_EQ(cost, optimal_cost(freqs));
    EXPECT_LE(kraft_sum(lengths), 1.0);
  }
}

TEST(Huffman, LengthCapOnFibonacciWeights) {
  // Fibonacci weights force a maximally skewed tree of depth n - 1.
  std::vector<std::uint64_t> freqs{1, 1};
  while (freqs.size() < 45) freqs.push_back(freqs[freqs.size() - 1] + freqs[freqs.size() - 2]);
  auto uncapped = huffman_code_lengths(freqs, 64);
  EXPECT_EQ(*std::max_element(uncapped.begin(), uncapped.end()), 44);
  auto capped = huffman_code_lengths(freqs);
  EXPECT_LE(*std::max_element(capped.begin(), capped.end()), HuffmanCode::kMaxCodeLength);
  EXPECT_LE(kraft_sum(capped), 1.0);
  for (auto l : capped) EXPECT_GT(l, 0);

  auto code = HuffmanCode::from_lengths(capped);
  BitWriter w;
  for (std::uint32_t s = 0; s < freqs.size(); ++s) code.encode(w, s);
  const auto bits = w.bit_count();
  auto bytes = std::move(w).take();
  BitReader r(bytes, bits);
  for (std::uint32_t s = 0; s < freqs.size(); ++s) EXPECT_EQ(code.decode(r), s);
}

TEST(Huffman, SingleSymbolGetsOneBit) {
  std::vector<std::uint64_t> freqs(10, 0);
  freqs[7] = 1000;
  auto code = HuffmanCode::from_frequencies(freqs);
  EXPECT_EQ(code.lengths()[7], 1);
  BitWriter w;
  code.encode(w, 7);
  code.encode(w, 7);
  auto bytes = std::move(w).take();
  BitReader r(bytes, 2);
  EXPECT_EQ(code.decode(r), 7u);
  EXPECT_EQ(code.decode(r), 7u);
}

TEST(Huffman, SerializeRoundTrip) {
  std::vector<std::uint64_t> freqs(1000, 0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) freqs[rng() % 1000] += 1 + rng() % 500;
  auto code = HuffmanCode::from_frequencies(freqs);
  std::vector<std::uint8_t> buf;
  code.serialize(buf);
  bytes::Reader<DecodeError> in(buf);
  auto back = HuffmanCode::deserialize(in, 1000);
  EXPECT_EQ(back.lengths(), code.lengths());
  EXPECT_EQ(in.remaining(), 0u);
}

TEST(Huffman, RejectsBadInput) {
  std::vector<std::uint64_t> none(5, 0);
  EXPECT_THROW(HuffmanCode::from_frequencies(none), ArgumentError);
  // three 1-bit codes violate Kraft
  EXPECT_THROW(HuffmanCode::from_lengths({1, 1, 1}), DecodeError);
  auto code = HuffmanCode::from_lengths({1, 1, 0});
  BitWriter w;
  EXPECT_THROW(code.encode(w, 2), ArgumentError);
  std::vector<std::uint8_t> bad{40};
  bytes::Reader<DecodeError> in(bad);
  EXPECT_THROW(HuffmanCode::deserialize(in, 10), DecodeError);
}

TEST(Huffman, IncompleteCodeDetectsInvalidBits) {
  // lengths {1, 2}: code "11" is unassigned
  auto code = HuffmanCode::from_lengths({1, 2});
  std::vector<std::uint8_t> bytes{0xC0};
  BitReader r(bytes, 2);
  EXPECT_THROW(code.decode(r), DecodeError);
}

TEST(BitStream, ReaderStopsAtLimit) {
  BitWriter w;
  w.write(0b101, 3);
  auto bytes = std::move(w).take();
  BitReader r(bytes, 3);
  EXPECT_EQ(r.read(3), 0b101u);
  EXPECT_THROW(r.get_bit(), DecodeError);
  EXPECT_THROW(BitReader(bytes, 9), DecodeError);
}

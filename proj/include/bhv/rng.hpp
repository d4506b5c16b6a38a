#pragma once

#include <array>
#include <cstdint>

namespace bhv {

// Counter-based generator (Philox4x32-10). A stream is identified by a
// (seed, stream id) pair; draws depend only on that pair and the draw
// index, so independently derived streams can be consumed in any order
// (or on different threads) without affecting each other's output.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream = 0);

  // Derives a child stream. Children of distinct (stream, index) pairs
  // are distinct for all practical purposes.
  RngStream substream(uint64_t index) const;

  uint64_t next_u64();
  double uniform01();                    // strictly inside (0,1)
  double uniform(double lo, double hi);
  double normal();                       // N(0,1)
  double normal(double mean, double sd);
  double exponential(double rate);
  long uniform_int(long lo, long hi);    // inclusive bounds
  bool bernoulli(double p);

  // Truncated geometric on {lo,...,hi} with P(l) proportional to
  // (1-alpha)^(l-lo).
  long trunc_geometric(double alpha, long lo, long hi);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  void refill();

  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
  std::array<uint32_t, 4> counter_{};
  std::array<uint32_t, 2> key_{};
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;  // forces refill on first draw
  double spare_normal_ = 0.0;
  bool have_spare_normal_ = false;
};

// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> counter,
                                      std::array<uint32_t, 2> key);

}  // namespace bhv

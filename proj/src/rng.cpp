#include "bhv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bhv {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                      std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream) {
  uint64_t k = splitmix64(seed ^ splitmix64(stream));
  key_ = {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
}

RngStream RngStream::substream(uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(index + 1)));
}

void RngStream::refill() {
  block_ = philox4x32_10(counter_, key_);
  block_pos_ = 0;
  for (int i = 0; i < 4; ++i) {
    if (++counter_[i] != 0) break;
  }
}

uint64_t RngStream::next_u64() {
  if (block_pos_ > 2) refill();
  uint64_t lo = block_[block_pos_];
  uint64_t hi = block_[block_pos_ + 1];
  block_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::normal(double mean, double sd) {
  return mean + sd * normal();
}

double RngStream::exponential(double rate) {
  return -std::log(uniform01()) / rate;
}

long RngStream::uniform_int(long lo, long hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  uint64_t n = static_cast<uint64_t>(hi - lo) + 1;
  if (n == 0) return static_cast<long>(next_u64());  // full 64-bit range
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return lo + static_cast<long>(x % n);
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

long RngStream::trunc_geometric(double alpha, long lo, long hi) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("trunc_geometric: alpha outside (0,1)");
  }
  if (lo > hi) throw std::invalid_argument("trunc_geometric: empty range");
  // Inverse CDF: P(l = lo + k) proportional to q^k over k = 0..n-1.
  long n = hi - lo + 1;
  double q = 1.0 - alpha;
  double u = uniform01();
  double mass = 1.0 - std::pow(q, static_cast<double>(n));
  double k = std::ceil(std::log1p(-u * mass) / std::log(q)) - 1.0;
  if (k < 0) k = 0;
  if (k > static_cast<double>(n - 1)) k = static_cast<double>(n - 1);
  return lo + static_cast<long>(k);
}

}  // namespace bhv

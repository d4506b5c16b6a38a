#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "bhv/rng.hpp"

using namespace bhv;

TEST_CASE("philox known answer") {
  auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);
}

TEST_CASE("streams reproduce and differ") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RngStream d(42);
  RngStream d1 = d.substream(1);
  RngStream d2 = d.substream(2);
  CHECK(d1.next_u64() != d2.next_u64());
  // Substream derivation ignores parent consumption.
  RngStream e(42);
  e.next_u64();
  CHECK(e.substream(1).next_u64() == RngStream(42).substream(1).next_u64());
}

TEST_CASE("uniform and normal moments") {
  RngStream r(123);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(std::fabs(sum / n - 0.5) < 0.005);
  CHECK(std::fabs(sum2 / n - 1.0 / 3) < 0.005);

  double ns = 0, ns2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    ns += z;
    ns2 += z * z;
  }
  CHECK(std::fabs(ns / n) < 0.01);
  CHECK(std::fabs(ns2 / n - 1.0) < 0.02);
}

TEST_CASE("truncated geometric law") {
  RngStream r(9);
  const double alpha = 0.3;
  const long lo = 1, hi = 6;
  std::map<long, long> counts;
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[r.trunc_geometric(alpha, lo, hi)];
  double q = 1.0 - alpha;
  double mass = (1.0 - std::pow(q, 6.0));
  for (long v = lo; v <= hi; ++v) {
    double expected = alpha * std::pow(q, static_cast<double>(v - lo)) / mass;
    double got = static_cast<double>(counts[v]) / n;
    CHECK(std::fabs(got - expected) < 0.005);
  }
}

TEST_CASE("uniform_int covers range uniformly") {
  RngStream r(5);
  std::map<long, long> counts;
  for (int i = 0; i < 60000; ++i) ++counts[r.uniform_int(-2, 3)];
  CHECK(counts.size() == 6);
  for (auto& [k, v] : counts) {
    (void)k;
    CHECK(std::fabs(v / 60000.0 - 1.0 / 6) < 0.01);
  }
}

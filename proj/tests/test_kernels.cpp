#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace bhv;
using namespace bhvtest;

namespace {
constexpr double kTau = 2.0 * 3.14159265358979323846;
}

TEST_CASE("ggf density closed forms") {
  auto taxa = numeric_taxa(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 1.0}, {{4, 5}, 1.5}});
  double t = 0.2;

  SUBCASE("same orthant: isotropic Gaussian") {
    Tree x = make_tree(taxa, {{{1, 2}, 1.3}, {{4, 5}, 1.1}});
    double d2 = 0.3 * 0.3 + 0.4 * 0.4;
    double expected = std::exp(-d2 / (2 * t)) / (kTau * t);
    CHECK(ggf_density(x, {x0, t}) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("one codimension-1 crossing halves the density") {
    Tree x = make_tree(taxa, {{{1, 2}, 1.3}, {{3, 5}, 0.2}});
    Geodesic g = geodesic(x, x0);
    auto cls = classify(g);
    REQUIRE(cls.nu == 1);
    double expected =
        0.5 * std::exp(-g.length() * g.length() / (2 * t)) / (kTau * t);
    CHECK(ggf_density(x, {x0, t}) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("cone-path target has zero density") {
    Tree x = make_tree(taxa, {{{1, 4}, 0.7}, {{2, 5}, 0.7}});
    REQUIRE(classify(geodesic(x, x0)).high_codim.size() == 1);
    CHECK(ggf_density(x, {x0, t}) == 0.0);
    CHECK(ggf_log_density(x, {x0, t}) == -INFINITY);
  }
  SUBCASE("unresolved evaluation point has zero density") {
    Tree x = make_tree(taxa, {{{1, 2}, 1.0}});
    CHECK(ggf_density(x, {x0, t}) == 0.0);
  }
}

TEST_CASE("ggf sample concentrates as dispersion vanishes") {
  auto taxa = numeric_taxa(6);
  RngStream rng(404);
  Tree x0 = random_tree(taxa, rng);
  double t = 1e-6;
  double sum_d2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Tree y = ggf_sample(x0, t, rng);
    double d = bhv_distance(y, x0);
    sum_d2 += d * d;
  }
  // E d^2 = (N-3) t in the small-t regime.
  CHECK(sum_d2 / n == doctest::Approx(3.0 * t).epsilon(0.05));
}

TEST_CASE("star-tree centre fires uniformly over axes") {
  auto taxa = numeric_taxa(4);
  Tree star = star_tree(taxa);
  RngStream rng(405);
  std::map<int, long> axis_counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Tree y = ggf_sample(star, 0.3, rng);
    ++axis_counts[spider4_coordinates(y).first];
  }
  double se = std::sqrt((1.0 / 3) * (2.0 / 3) / n);
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::fabs(axis_counts[axis] / static_cast<double>(n) - 1.0 / 3) <
          3 * se);
  }
}

TEST_CASE("deep-orthant samples keep the topology") {
  auto taxa = numeric_taxa(6);
  Tree x0 = make_tree(
      taxa, {{{1, 2}, 0.65}, {{1, 2, 3}, 0.70}, {{5, 6}, 0.60}});
  double t = 0.01;  // every edge >= 6 sqrt(t)
  double bound = 1.0;
  for (double len : x0.lengths()) {
    bound *= 1.0 - 2.0 * phi_bar(len / std::sqrt(t));
  }
  RngStream rng(406);
  const int n = 20000;
  long same = 0;
  for (int i = 0; i < n; ++i) {
    if (ggf_sample(x0, t, rng).same_topology(x0)) ++same;
  }
  double freq = same / static_cast<double>(n);
  double se = std::sqrt(freq * (1 - freq) / n);
  CHECK(freq >= bound - 3 * se);
}

TEST_CASE("ggf density integrates to one on BHV4") {
  auto taxa = numeric_taxa(4);
  for (double a : {0.5, 0.05}) {
    for (double t : {0.25, 0.04}) {
      Tree x0 = make_tree(taxa, {{{1, 2}, a}});
      double upper = a + 10 * std::sqrt(t) + 0.5;
      double integral = bhv4_integral(
          [&](int axis, double b) {
            if (b <= 0.0) b = 1e-12;  // continuous limit at the origin
            Tree y = axis == 0 ? make_tree(taxa, {{{1, 2}, b}})
                   : axis == 1 ? make_tree(taxa, {{{1, 3}, b}})
                               : make_tree(taxa, {{{1, 4}, b}});
            return ggf_density(y, {x0, t});
          },
          upper, 8000);
      CHECK(std::fabs(integral - 1.0) < 1e-6);
    }
  }
  SUBCASE("unresolved centre (star tree)") {
    Tree star = star_tree(taxa);
    double t = 0.2;
    double integral = bhv4_integral(
        [&](int axis, double b) {
          if (b <= 0.0) b = 1e-12;
          Tree y = axis == 0 ? make_tree(taxa, {{{1, 2}, b}})
                 : axis == 1 ? make_tree(taxa, {{{1, 3}, b}})
                             : make_tree(taxa, {{{1, 4}, b}});
          return ggf_density(y, {star, t});
        },
        10 * std::sqrt(t), 8000);
    CHECK(std::fabs(integral - 1.0) < 1e-6);
  }
}

TEST_CASE("ggf density integrates to one on BHV5") {
  auto taxa = numeric_taxa(5);
  RngStream rng(407);
  Tree deep = make_tree(taxa, {{{1, 2}, 0.8}, {{4, 5}, 0.6}});
  CHECK(std::fabs(bhv5_mc_integral({deep, 0.1}, 60000, rng) - 1.0) < 3e-3);
  Tree near = make_tree(taxa, {{{1, 2}, 0.06}, {{4, 5}, 0.04}});
  RngStream rng2(408);
  CHECK(std::fabs(bhv5_mc_integral({near, 0.15}, 60000, rng2) - 1.0) < 3e-3);
}

TEST_CASE("appendix normalization at the BHV4 star tree") {
  auto taxa = numeric_taxa(4);
  Tree star = star_tree(taxa);
  CHECK(resolution_count(star) == 3);
  CHECK(std::exp(log_resolution_factor(star)) == doctest::Approx(2.0 / 3.0));
  // Density on each axis is K * g_t(b): the 1/3-per-axis law.
  double t = 0.3, b = 0.4;
  Tree y = make_tree(taxa, {{{1, 2}, b}});
  double expected = (2.0 / 3.0) * std::exp(-b * b / (2 * t)) / std::sqrt(kTau * t);
  CHECK(ggf_density(y, {star, t}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(spider4_density(y, star, t) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sampler matches density on BHV4") {
  auto taxa = numeric_taxa(4);
  double a = 0.4, t = 0.2;
  Tree x0 = make_tree(taxa, {{{1, 2}, a}});
  int ax = spider4_coordinates(x0).first;
  RngStream rng(409);
  std::vector<std::vector<double>> lengths(3);
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    auto [axis, b] = spider4_coordinates(ggf_sample(x0, t, rng));
    lengths[axis].push_back(b);
  }
  // Per-axis masses under the GGF law: direct from the one-step density.
  double s = std::sqrt(t);
  double mass_same = 1.0 - phi_bar(a / s);
  double mass_other = 0.5 * phi_bar(a / s);
  CHECK(lengths[ax].size() / static_cast<double>(n) ==
        doctest::Approx(mass_same).epsilon(0.02));
  CHECK(lengths[(ax + 1) % 3].size() / static_cast<double>(n) ==
        doctest::Approx(mass_other).epsilon(0.05));
  // Conditional CDFs per axis.
  auto same_cdf = [&](double b) {
    return (norm_cdf((b - a) / s) - norm_cdf(-a / s)) / mass_same;
  };
  auto other_cdf = [&](double b) {
    return 0.5 * (norm_cdf((b + a) / s) - norm_cdf(a / s)) / mass_other;
  };
  CHECK(ks_distance(lengths[ax], same_cdf) < 0.02);
  CHECK(ks_distance(lengths[(ax + 1) % 3], other_cdf) < 0.03);
  CHECK(ks_distance(lengths[(ax + 2) % 3], other_cdf) < 0.03);
}

TEST_CASE("random walk basics and weak convergence") {
  auto taxa = numeric_taxa(4);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.5}});
  double t0 = 0.25;

  SUBCASE("tiny dispersion pins the endpoint") {
    RngStream rng(410);
    int close = 0;
    for (int i = 0; i < 2000; ++i) {
      WalkResult w = random_walk({x0, 1e-8, 5}, rng);
      if (bhv_distance(w.endpoint, x0) < 1e-3) ++close;
    }
    CHECK(close >= 1998);
  }

  SUBCASE("m = 1 endpoint law is the GGF law") {
    int ax = spider4_coordinates(x0).first;
    RngStream rng(411);
    std::vector<double> walk_same, ggf_same;
    for (int i = 0; i < 20000; ++i) {
      auto [axis, b] = spider4_coordinates(random_walk({x0, t0, 1}, rng).endpoint);
      if (axis == ax) walk_same.push_back(b);
      auto [axis2, b2] = spider4_coordinates(ggf_sample(x0, t0, rng));
      if (axis2 == ax) ggf_same.push_back(b2);
    }
    double s = std::sqrt(t0);
    double mass = 1.0 - phi_bar(0.5 / s);
    auto cdf = [&](double b) {
      return (norm_cdf((b - 0.5) / s) - norm_cdf(-0.5 / s)) / mass;
    };
    CHECK(ks_distance(walk_same, cdf) < 0.02);
    CHECK(ks_distance(ggf_same, cdf) < 0.02);
  }

  SUBCASE("endpoint law approaches the exact kernel as m grows") {
    int ax = spider4_coordinates(x0).first;
    std::map<int, double> ks;
    for (int m : {1, 5, 20, 100}) {
      RngStream rng(412 + m);
      std::vector<double> same_axis;
      int n = 15000;
      for (int i = 0; i < n; ++i) {
        auto [axis, b] =
            spider4_coordinates(random_walk({x0, t0, m}, rng).endpoint);
        if (axis == ax) same_axis.push_back(b);
      }
      auto cdf = [&](double b) { return spider_axis_cdf(b, ax, ax, 0.5, t0); };
      ks[m] = ks_distance(same_axis, cdf);
    }
    CHECK(ks[100] < 0.02);
    CHECK(ks[100] < ks[1]);
    CHECK(ks[20] < ks[1]);
  }
}

TEST_CASE("spider4 reference kernel") {
  SUBCASE("symmetric at the origin and normalized") {
    double t = 0.4;
    for (int axis = 0; axis < 3; ++axis) {
      CHECK(spider4_axis_density(axis, 0.7, 1, 0.0, t) ==
            doctest::Approx(spider4_axis_density(0, 0.7, 0, 0.0, t)));
    }
    for (double a : {0.0, 0.3, 1.0}) {
      double integral = 0.0;
      for (int axis = 0; axis < 3; ++axis) {
        integral += simpson(
            [&](double b) { return spider4_axis_density(axis, b, 0, a, t); },
            0.0, a + 10 * std::sqrt(t), 6000);
      }
      CHECK(std::fabs(integral - 1.0) < 1e-6);
    }
  }
  SUBCASE("consistency with the star-source kernel at N=4") {
    auto taxa = numeric_taxa(4);
    double t = 0.21;
    Tree y = make_tree(taxa, {{{1, 3}, 0.35}});
    Tree star = star_tree(taxa);
    CHECK(star_source_density(y, t) ==
          doctest::Approx(spider4_density(y, star, t)).epsilon(1e-12));
  }
}

TEST_CASE("star source kernel integrates to one on BHV5") {
  auto taxa = numeric_taxa(5);
  RngStream rng(413);
  auto orthants = bhv5_orthants(*taxa);
  REQUIRE(orthants.size() == 15);
  double t = 0.3;
  double scale = 2.0 * std::sqrt(t);
  double total = 0.0;
  long stream = 0;
  for (auto& [s1, s2] : orthants) {
    RngStream r = rng.substream(stream++);
    double acc = 0.0;
    const long n = 200000;
    for (long i = 0; i < n; ++i) {
      double u1 = std::fabs(scale * r.normal());
      double u2 = std::fabs(scale * r.normal());
      if (u1 <= 0 || u2 <= 0) continue;
      double q1 = 2 * std::exp(-u1 * u1 / (2 * scale * scale)) /
                  (scale * std::sqrt(kTau));
      double q2 = 2 * std::exp(-u2 * u2 / (2 * scale * scale)) /
                  (scale * std::sqrt(kTau));
      Tree y(taxa, {{s1, u1}, {s2, u2}});
      acc += star_source_density(y, t) / (q1 * q2);
    }
    total += acc / n;
  }
  CHECK(std::fabs(total - 1.0) < 1e-3);
}

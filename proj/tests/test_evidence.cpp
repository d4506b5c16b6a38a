#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bhv/evidence.hpp"
#include "oracles.hpp"
#include "spider_walk_oracle.hpp"
#include "test_util.hpp"

using namespace bhv;
using namespace bhvtest;

TEST_CASE("log bayes factor") {
  CHECK(log_bayes_factor(108.58, 82.64) == doctest::Approx(11.27).epsilon(1e-3));
  CHECK(log_bayes_factor(5.0, 5.0) == 0.0);
  CHECK(log_bayes_factor(108.58, -456.13) > 0.0);
}

TEST_CASE("m = 1 estimators are exact") {
  auto taxa = numeric_taxa(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.6}, {{4, 5}, 0.7}});
  Tree xs = make_tree(taxa, {{{1, 2}, 0.8}, {{4, 5}, 0.5}});
  double t0 = 0.2;
  double exact = ggf_log_density(xs, {x0, t0});
  EvidenceConfig config;
  std::vector<Tree> data{xs};
  RngStream r1(1), r2(2), r3(3);
  CHECK(chib_log_ml(data, x0, t0, 1, config, r1).log_ml ==
        doctest::Approx(exact).epsilon(1e-14));
  CHECK(tunnel_log_ml(data, x0, t0, 1, config, r2).log_ml ==
        doctest::Approx(exact).epsilon(1e-14));
  CHECK(stepping_stone_log_ml(data, x0, t0, 1, config, r3).log_ml ==
        doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("stepping stone with one rung is importance sampling") {
  auto taxa = numeric_taxa(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.6}, {{4, 5}, 0.7}});
  Tree xs = make_tree(taxa, {{{1, 2}, 0.9}, {{4, 5}, 0.4}});
  double t0 = 0.15;
  int m = 5;
  EvidenceConfig config;
  config.k_rungs = 1;
  config.m2 = 600;
  config.bootstrap = 0;
  std::vector<Tree> data{xs};
  RngStream rng(11);
  double est = stepping_stone_log_ml(data, x0, t0, m, config, rng).log_ml;

  // Manual importance sampling with the identical stream layout.
  RngStream manual(11);
  RngStream datum = manual.substream(0);
  RngStream prop_rng = datum.substream(0);
  ProposalTuning tuning;
  tuning.alpha_b = config.alpha_b;
  std::vector<double> lr;
  for (int j = 0; j < config.m2; ++j) {
    RngStream s = prop_rng.substream(j);
    auto prop = propose_independence(x0, xs, t0, m, tuning, s, nullptr);
    if (!prop || !prop->valid()) {
      lr.push_back(-INFINITY);
      continue;
    }
    double log_f = 0.0;
    for (const TransitionStat& st : prop->legs) {
      log_f += transition_log_density(st, t0 / m, 2);
    }
    lr.push_back(log_f - prop->log_q);
  }
  double hi = -INFINITY;
  for (double v : lr) hi = std::max(hi, v);
  double acc = 0.0;
  for (double v : lr) acc += std::exp(v - hi);
  double manual_est = hi + std::log(acc / lr.size());
  CHECK(est == doctest::Approx(manual_est).epsilon(1e-12));
}

TEST_CASE("chib fails loudly when the proposal support is empty") {
  SharedMlSamples s;
  s.post_log_f = {-1.0, -2.0};
  s.post_log_q = {-1.5, -1.4};
  s.prop_log_f = {-INFINITY, -INFINITY};
  s.prop_log_q = {0.0, 0.0};
  EvidenceConfig config;
  config.h = 2;
  CHECK_THROWS_AS(chib_from_samples(s, config), EstimatorError);
}

TEST_CASE("bridge initialization failure carries diagnostics") {
  auto taxa = numeric_taxa(5);
  // m=2 across a cone path: no resolved midpoint yields two simple legs.
  Tree x0 = make_tree(taxa, {{{1, 2}, 1.0}, {{4, 5}, 1.0}});
  Tree xs = make_tree(taxa, {{{1, 4}, 1.0}, {{2, 5}, 1.0}});
  EvidenceConfig config;
  config.m1 = 10;
  config.m2 = 10;
  config.init_cap = 300;
  std::vector<Tree> data{xs};
  RngStream rng(12);
  CHECK_THROWS_AS(chib_log_ml(data, x0, 0.1, 2, config, rng), BridgeInitError);
}

TEST_CASE("chib and tunnel track the exact walk density on the spider") {
  auto taxa = numeric_taxa(4);
  double a = 0.5, t0 = 0.25;
  int m = 5;
  Tree x0 = make_tree(taxa, {{{1, 2}, a}});
  int ax = spider4_coordinates(x0).first;
  SpiderWalkOracle oracle(ax, a, t0, m, 900);
  CHECK(std::fabs(oracle.total_mass() - 1.0) < 1e-6);

  EvidenceConfig config;
  config.m1 = 1500;
  config.m2 = 1500;
  config.h = 20;
  config.burnin = 300;
  for (double b : {0.35, 0.8}) {
    Tree xs = make_tree(taxa, {{{1, 2}, b}});
    double truth = oracle.log_density(ax, b);
    std::vector<Tree> data{xs};
    RngStream r1(100 + static_cast<int>(b * 100));
    MlEstimate chib = chib_log_ml(data, x0, t0, m, config, r1);
    RngStream r2(200 + static_cast<int>(b * 100));
    MlEstimate tun = tunnel_log_ml(data, x0, t0, m, config, r2);
    INFO("b=", b, " truth=", truth, " chib=", chib.log_ml, "+-", chib.se,
         " tunnel=", tun.log_ml, "+-", tun.se);
    CHECK(std::fabs(chib.log_ml - truth) < 0.15);
    CHECK(std::fabs(tun.log_ml - truth) < 0.15);
  }
}

TEST_CASE("three estimators agree on a BHV5 fixture") {
  auto taxa = numeric_taxa(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.5}, {{4, 5}, 0.6}});
  Tree xs = make_tree(taxa, {{{1, 3}, 0.3}, {{1, 3, 4}, 0.2}});
  double t0 = 0.2;
  int m = 6;
  EvidenceConfig config;
  config.m1 = 1200;
  config.m2 = 1200;
  config.k_rungs = 30;
  config.burnin = 300;
  std::vector<Tree> data{xs};
  RngStream r1(21), r2(22), r3(23);
  MlEstimate chib = chib_log_ml(data, x0, t0, m, config, r1);
  MlEstimate tun = tunnel_log_ml(data, x0, t0, m, config, r2);
  MlEstimate ss = stepping_stone_log_ml(data, x0, t0, m, config, r3);
  INFO("chib ", chib.log_ml, "+-", chib.se, " tunnel ", tun.log_ml, "+-",
       tun.se, " ss ", ss.log_ml, "+-", ss.se);
  auto pooled = [](const MlEstimate& x, const MlEstimate& y) {
    return std::sqrt(x.se * x.se + y.se * y.se) + 0.02;
  };
  CHECK(std::fabs(chib.log_ml - tun.log_ml) < 3 * pooled(chib, tun));
  CHECK(std::fabs(chib.log_ml - ss.log_ml) < 3 * pooled(chib, ss));
  CHECK(std::fabs(tun.log_ml - ss.log_ml) < 3 * pooled(tun, ss));
}

TEST_CASE("chib variance shrinks as the posterior sample grows") {
  auto taxa = numeric_taxa(4);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.5}});
  Tree xs = make_tree(taxa, {{{1, 2}, 0.75}});
  double t0 = 0.25;
  int m = 4;
  std::vector<Tree> data{xs};
  std::map<int, double> variance;
  for (int m1 : {100, 1000, 10000}) {
    EvidenceConfig config;
    config.m1 = m1;
    config.m2 = 400;
    config.h = std::min(20, m1);
    config.burnin = 100;
    config.bootstrap = 0;
    std::vector<double> estimates;
    for (int rep = 0; rep < 10; ++rep) {
      RngStream rng(3000 + 17 * rep + m1);
      estimates.push_back(chib_log_ml(data, x0, t0, m, config, rng).log_ml);
    }
    double mean = 0;
    for (double e : estimates) mean += e;
    mean /= estimates.size();
    double v = 0;
    for (double e : estimates) v += (e - mean) * (e - mean);
    variance[m1] = v / (estimates.size() - 1);
  }
  INFO("var100 ", variance[100], " var1000 ", variance[1000], " var10000 ",
       variance[10000]);
  CHECK(variance[10000] < variance[100]);
}

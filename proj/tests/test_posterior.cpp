#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "bhv/posterior.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bhv;
using namespace bhvtest;

TEST_CASE("prior rates and quantiles") {
  Prior prior{10};
  CHECK(prior.dn2() == doctest::Approx(2.5));
  CHECK(prior.gamma_rate() == doctest::Approx(1.327));
  CHECK(prior.exp_rate() == doctest::Approx(12.908));

  // P(d(0,x0)^2 <= D_N^2) = 0.99 under the Gamma law.
  boost::math::gamma_distribution<double> gamma(0.5, 1.0 / prior.gamma_rate());
  CHECK(std::fabs(boost::math::cdf(gamma, prior.dn2()) - 0.99) < 1e-6);

  // 99% quantile of (N-3) t0 is D_N^2, up to the paper's rounded rate.
  double q99 = -std::log(0.01) / prior.exp_rate();
  CHECK(std::fabs((10 - 3) * q99 - prior.dn2()) / prior.dn2() < 2e-3);
}

TEST_CASE("log prior evaluation") {
  Prior prior{10};
  auto taxa = numeric_taxa(10);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.5}});
  double d2 = 0.25;
  double rate = prior.gamma_rate();
  double expected = 0.5 * std::log(rate) - std::lgamma(0.5) -
                    0.5 * std::log(d2) - rate * d2;
  CHECK(log_prior_x0(x0, prior) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_prior_t0(1e-9, prior) ==
        doctest::Approx(std::log(prior.exp_rate())).epsilon(1e-6));
  CHECK(log_prior(x0, 0.1, prior) ==
        doctest::Approx(log_prior_x0(x0, prior) + log_prior_t0(0.1, prior)));
  CHECK_THROWS(log_prior_t0(0.0, prior));
}

TEST_CASE("initialize") {
  auto taxa = numeric_taxa(5);
  Prior prior{5};
  InferenceConfig config;
  config.m = 6;
  config.frechet_iters = 400;

  SUBCASE("single datum") {
    Tree x = make_tree(taxa, {{{1, 2}, 0.4}, {{4, 5}, 0.3}});
    std::vector<Tree> data{x};
    RngStream rng(1);
    InferenceState st = initialize(data, prior, config, rng);
    CHECK(st.x0 == x);
    CHECK(st.t0 == doctest::Approx(1e-6));
    CHECK(st.bridges.size() == 1);
    CHECK(st.bridges[0].path.points.front() == x);
    CHECK(st.bridges[0].path.points.back() == x);
  }

  SUBCASE("two-against-one picks the majority datum") {
    Tree x = make_tree(taxa, {{{1, 2}, 0.4}, {{4, 5}, 0.3}});
    Tree y = make_tree(taxa, {{{1, 2}, 0.8}, {{4, 5}, 0.9}});
    std::vector<Tree> data{x, x, y};
    RngStream rng(2);
    InferenceState st = initialize(data, prior, config, rng);
    CHECK(st.x0 == x);
  }

  SUBCASE("single-orthant data reduce to the Euclidean variance") {
    std::vector<Tree> data{
        make_tree(taxa, {{{1, 2}, 2.0}, {{4, 5}, 2.2}}),
        make_tree(taxa, {{{1, 2}, 2.4}, {{4, 5}, 1.8}}),
        make_tree(taxa, {{{1, 2}, 2.2}, {{4, 5}, 2.0}}),
    };
    RngStream rng(3);
    config.frechet_iters = 40000;
    InferenceState st = initialize(data, prior, config, rng);
    // Euclidean Frechet variance around the coordinate mean.
    double mean1 = (2.0 + 2.4 + 2.2) / 3, mean2 = (2.2 + 1.8 + 2.0) / 3;
    double var = 0.0;
    for (const Tree& t : data) {
      double d1 = t.length(split_of({1, 2}, *taxa)) - mean1;
      double d2 = t.length(split_of({4, 5}, *taxa)) - mean2;
      var += d1 * d1 + d2 * d2;
    }
    var /= 3;
    CHECK(st.t0 == doctest::Approx(var).epsilon(0.05));
  }

  SUBCASE("unresolved data rejected") {
    std::vector<Tree> data{make_tree(taxa, {{{1, 2}, 0.4}})};
    RngStream rng(4);
    CHECK_THROWS_AS(initialize(data, prior, config, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("incremental log joint matches recomputation") {
  auto taxa = numeric_taxa(5);
  Prior prior{5};
  RngStream data_rng(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.5}, {{4, 5}, 0.4}});
  std::vector<Tree> data;
  for (int i = 0; i < 3; ++i) {
    data.push_back(random_walk({x0, 0.05, 30}, data_rng).endpoint);
  }
  InferenceConfig config;
  config.m = 8;
  config.iters = 2000;
  config.burnin = 100;
  config.thin = 10;
  config.lambda0 = 0.05;
  config.sigma0 = 0.4;
  config.verify_log_joint = true;
  RngStream rng(6);
  PosteriorTrace trace = run_inference(data, prior, config, rng);
  CHECK(trace.rows.size() == (config.iters - config.burnin) / config.thin);
  CHECK(trace.max_log_joint_drift < 1e-8);
  CHECK(trace.counters.bridge_accepts > 0);
  CHECK(trace.counters.x0_accepts > 0);
  CHECK(trace.counters.t0_accepts > 0);

  // Bridges hang off the current source and stay valid.
  const InferenceState& st = *trace.final_state;
  for (const DatumBridge& b : st.bridges) {
    CHECK(b.path.points.front() == st.x0);
    for (size_t j = 1; j < b.path.points.size(); ++j) {
      CHECK(transition_stat(b.path.points[j], b.path.points[j - 1]).valid);
    }
  }
}

TEST_CASE("zero-iteration run reports initialization only") {
  auto taxa = numeric_taxa(5);
  Prior prior{5};
  std::vector<Tree> data{make_tree(taxa, {{{1, 2}, 0.4}, {{4, 5}, 0.3}})};
  InferenceConfig config;
  config.m = 5;
  config.iters = 0;
  RngStream rng(7);
  PosteriorTrace trace = run_inference(data, prior, config, rng);
  CHECK(trace.rows.empty());
  CHECK(trace.x0_samples.empty());
  CHECK(trace.init_t0 == doctest::Approx(1e-6));
}

TEST_CASE("single-datum dispersion posterior matches 1-D quadrature") {
  // Fixed source, one deep-orthant datum: the walk likelihood is an
  // isotropic Gaussian in the source's orthant, so the t0 posterior has
  // a one-dimensional quadrature ground truth.
  auto taxa = numeric_taxa(5);
  Prior prior{5};
  Tree x0 = make_tree(taxa, {{{1, 2}, 2.0}, {{4, 5}, 2.0}});
  Tree xstar = make_tree(taxa, {{{1, 2}, 2.35}, {{4, 5}, 1.75}});
  double d2 = 0.35 * 0.35 + 0.25 * 0.25;

  double rate_e = prior.exp_rate();
  auto weight = [&](double t0) {
    return rate_e * std::exp(-rate_e * t0) *
           std::exp(-d2 / (2 * t0)) / (2 * 3.14159265358979323846 * t0);
  };
  double norm = 0.0, mean_accum = 0.0;
  const int nt = 4000;
  for (int i = 0; i < nt; ++i) {
    double t0 = 1e-4 + (3.0 - 1e-4) * (i + 0.5) / nt;
    double w = weight(t0);
    norm += w;
    mean_accum += t0 * w;
  }
  double oracle_mean = mean_accum / norm;

  InferenceConfig config;
  config.m = 10;
  config.iters = 30000;
  config.burnin = 3000;
  config.thin = 3;
  config.sigma0 = 0.8;
  config.fix_x0 = true;
  config.x0_init = x0;
  config.t0_init = 0.3;
  std::vector<Tree> data{xstar};
  RngStream rng(8);
  PosteriorTrace trace = run_inference(data, prior, config, rng);
  std::vector<double> t0s;
  for (const TraceRow& r : trace.rows) t0s.push_back(r.t0);
  double mean = 0.0;
  for (double v : t0s) mean += v;
  mean /= t0s.size();
  double se = batch_means_se(t0s);
  INFO("oracle ", oracle_mean, " mcmc ", mean, " se ", se);
  CHECK(std::fabs(mean - oracle_mean) < 3 * se + 0.005);
}

TEST_CASE("distinct topology diagnostic is monotone in t0") {
  auto taxa = numeric_taxa(5);
  Tree x0 = make_tree(taxa, {{{1, 2}, 0.15}, {{4, 5}, 0.1}});
  RngStream rng(9);
  std::vector<int> ms{25, 50};
  auto low = distinct_topology_diagnostic(x0, 0.005, ms, 300, rng);
  auto high = distinct_topology_diagnostic(x0, 0.5, ms, 300, rng);
  CHECK(low[0].second < high[0].second);
  CHECK(high[0].second > 3);
}

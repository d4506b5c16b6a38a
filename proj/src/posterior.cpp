#include "bhv/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "bhv/newick.hpp"
#include "bhv/parallel.hpp"

namespace bhv {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kT0Floor = 1e-12;
constexpr double kT0Cap = 1e3;

double lgamma_half() { return 0.5723649429247001;  /* log Gamma(1/2) */ }

ProposalTuning tuning_of(const InferenceConfig& c) {
  ProposalTuning t;
  t.alpha_b = c.alpha_b;
  t.use_penalty = c.use_penalty;
  return t;
}

double bridge_log_f(const DatumBridge& b, double t0, int m, int nprime) {
  double s = 0.0;
  double step_var = t0 / m;
  for (const TransitionStat& st : b.legs) {
    s += transition_log_density(st, step_var, nprime);
  }
  return s;
}

void refresh_log_joint(InferenceState& state, const Prior& prior) {
  double s = log_prior(state.x0, state.t0, prior);
  for (const DatumBridge& b : state.bridges) s += b.log_f;
  state.log_joint = s;
}

}  // namespace

double log_prior_x0(const Tree& x0, const Prior& prior) {
  double s = x0.norm();
  double d2 = s * s;
  if (!(d2 > 0.0)) return kNegInf;  // the star tree (measure zero)
  double rate = prior.gamma_rate();
  return 0.5 * std::log(rate) - lgamma_half() - 0.5 * std::log(d2) - rate * d2;
}

double log_prior_t0(double t0, const Prior& prior) {
  if (!(t0 > 0.0)) throw std::invalid_argument("log_prior_t0: t0 <= 0");
  double rate = prior.exp_rate();
  return std::log(rate) - rate * t0;
}

double log_prior(const Tree& x0, double t0, const Prior& prior) {
  return log_prior_x0(x0, prior) + log_prior_t0(t0, prior);
}

InferenceState initialize(std::span<const Tree> data, const Prior& prior,
                          const InferenceConfig& config, RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("initialize: empty data");
  for (const Tree& x : data) {
    if (!x.is_resolved()) {
      throw std::invalid_argument(
          "initialize: unresolved data tree; only fully resolved data are "
          "supported");
    }
  }
  RngStream init_rng = rng.substream(0);
  std::optional<Tree> x0 = config.x0_init;
  std::optional<double> t0 = config.t0_init;
  if (!x0 || !t0) {
    auto [mean, variance] = frechet_mean(data, config.frechet_iters, init_rng);
    if (!t0) t0 = variance;
    if (!x0) {
      size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < data.size(); ++i) {
        double d = bhv_distance(data[i], mean);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      x0 = data[best];
    }
  }
  if (!x0->is_resolved()) {
    throw std::invalid_argument("initialize: source tree not fully resolved");
  }

  InferenceState state{*x0, std::max(*t0, 1e-6), {}, 0.0};
  ProposalTuning tuning = tuning_of(config);
  int nprime = state.x0.n_taxa() - 3;
  state.bridges.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    RngStream s = init_rng.substream(i + 1);
    bool done = false;
    for (long attempt = 0; attempt < config.init_cap; ++attempt) {
      auto prop = propose_independence(state.x0, data[i], state.t0, config.m,
                                       tuning, s, nullptr);
      if (prop && prop->valid()) {
        DatumBridge b{std::move(prop->path), std::move(prop->legs), 0.0};
        b.log_f = bridge_log_f(b, state.t0, config.m, nprime);
        state.bridges.push_back(std::move(b));
        done = true;
        break;
      }
    }
    if (!done) {
      throw BridgeInitError("initialize: bridge for datum " +
                            std::to_string(i) + " failed after " +
                            std::to_string(config.init_cap) + " attempts");
    }
  }
  refresh_log_joint(state, prior);
  return state;
}

void step_bridges(InferenceState& state, const InferenceConfig& config,
                  RngStream sweep_rng, SweepCounters& counters) {
  int m = config.m;
  int nprime = state.x0.n_taxa() - 3;
  double step_var = state.t0 / m;
  ProposalTuning tuning = tuning_of(config);
  int l = static_cast<int>(sweep_rng.trunc_geometric(config.alpha_b, 1, m - 1));
  int a = static_cast<int>(sweep_rng.uniform_int(0, m - l - 1));

  long n = static_cast<long>(state.bridges.size());
  struct Decision {
    bool accept = false;
    double delta = 0.0;
    std::optional<PartialProposal> prop;
    uint64_t step4 = 0;
  };
  std::vector<Decision> decisions(n);
  parallel_for(n, config.threads, [&](long i) {
    DatumBridge& b = state.bridges[i];
    RngStream s = sweep_rng.substream(i);
    Decision& d = decisions[i];
    BridgeCounters bc;
    d.prop = propose_partial(b.path, a, l, tuning, s, &bc);
    d.step4 = bc.step4_rejects;
    if (!d.prop) return;
    for (int r = 0; r <= l; ++r) {
      d.delta += transition_log_density(d.prop->legs[r], step_var, nprime) -
                 transition_log_density(b.legs[a + r], step_var, nprime);
    }
    if (d.delta == kNegInf) return;
    double log_accept = d.delta + d.prop->log_q_ratio;
    d.accept = log_accept >= 0.0 || s.bernoulli(std::exp(log_accept));
  });

  for (long i = 0; i < n; ++i) {
    Decision& d = decisions[i];
    ++counters.bridge_proposals;
    counters.step4_rejects += d.step4;
    if (!d.accept) continue;
    DatumBridge& b = state.bridges[i];
    for (int r = 0; r < l; ++r) {
      b.path.points[a + 1 + r] = std::move(d.prop->points[r]);
    }
    for (int r = 0; r <= l; ++r) b.legs[a + r] = d.prop->legs[r];
    b.log_f += d.delta;
    state.log_joint += d.delta;
    ++counters.bridge_accepts;
  }
}

void step_x0(InferenceState& state, const Prior& prior,
             const InferenceConfig& config, RngStream sweep_rng,
             SweepCounters& counters) {
  ++counters.x0_proposals;
  int m = config.m;
  int nprime = state.x0.n_taxa() - 3;
  double step_var = state.t0 / m;
  ProposalTuning tuning = tuning_of(config);

  Tree x0_new = state.x0;
  for (int tries = 0;; ++tries) {
    x0_new = ggf_sample(state.x0, config.lambda0 * config.lambda0, sweep_rng);
    if (x0_new.is_resolved()) break;
    ++counters.x0_resample_unresolved;
    if (tries > 1000) return;  // pathological; keep the chain where it is
  }
  int l = static_cast<int>(sweep_rng.trunc_geometric(config.alpha_0, 0, m - 1));

  double log_accept = log_prior_x0(x0_new, prior) - log_prior_x0(state.x0, prior);
  struct PerDatum {
    std::vector<Tree> points;
    std::vector<TransitionStat> legs;
    double delta = 0.0;
    bool ok = false;
    uint64_t step4 = 0;
  };
  long n = static_cast<long>(state.bridges.size());
  std::vector<PerDatum> updates(n);

  parallel_for(n, config.threads, [&](long i) {
    DatumBridge& b = state.bridges[i];
    RngStream s = sweep_rng.substream(i);
    PerDatum& u = updates[i];
    if (l == 0) {
      TransitionStat leg1 = transition_stat(b.path.points[1], x0_new);
      double neu = transition_log_density(leg1, step_var, nprime);
      if (neu == kNegInf) return;  // zero target density: reject the move
      u.legs = {leg1};
      u.delta = neu - transition_log_density(b.legs[0], step_var, nprime);
      u.ok = true;
    } else {
      BridgeCounters bc;
      auto prop = propose_segment(x0_new, b.path.points[l + 1], state.t0, m,
                                  l + 1, tuning, s, &bc);
      u.step4 = bc.step4_rejects;
      if (!prop) return;
      double neu = 0.0, old = 0.0;
      for (int r = 0; r <= l; ++r) {
        neu += transition_log_density(prop->legs[r], step_var, nprime);
        old += transition_log_density(b.legs[r], step_var, nprime);
      }
      if (neu == kNegInf) return;
      double reverse = segment_log_q(
          state.x0, std::span<const Tree>(b.path.points).subspan(1, l),
          b.path.points[l + 1], state.t0, m, l + 1, tuning, nullptr);
      u.points = std::move(prop->points);
      u.legs = std::move(prop->legs);
      u.delta = (neu - old) + (reverse - prop->log_q);
      u.ok = true;
    }
  });

  bool all_ok = true;
  for (PerDatum& u : updates) {
    counters.step4_rejects += u.step4;
    if (!u.ok) all_ok = false;
    log_accept += u.delta;
  }
  if (!all_ok) return;  // some datum had zero proposal or target density

  if (log_accept < 0.0 && !sweep_rng.bernoulli(std::exp(log_accept))) return;

  state.x0 = x0_new;
  for (size_t i = 0; i < state.bridges.size(); ++i) {
    DatumBridge& b = state.bridges[i];
    PerDatum& u = updates[i];
    b.path.points[0] = x0_new;
    for (int r = 0; r < static_cast<int>(u.points.size()); ++r) {
      b.path.points[1 + r] = std::move(u.points[r]);
    }
    for (size_t r = 0; r < u.legs.size(); ++r) b.legs[r] = u.legs[r];
    b.log_f = bridge_log_f(b, state.t0, m, nprime);
  }
  refresh_log_joint(state, prior);
  ++counters.x0_accepts;
}

void step_t0(InferenceState& state, const Prior& prior,
             const InferenceConfig& config, RngStream sweep_rng,
             SweepCounters& counters) {
  ++counters.t0_proposals;
  int m = config.m;
  int nprime = state.x0.n_taxa() - 3;
  double t0 = state.t0;
  double t0_new = std::exp(sweep_rng.normal(std::log(t0), config.sigma0));
  if (t0_new < kT0Floor || t0_new > kT0Cap) {
    ++counters.t0_guard_hits;
    return;
  }

  double sum_d2 = 0.0;
  long legs = 0;
  for (const DatumBridge& b : state.bridges) {
    for (const TransitionStat& st : b.legs) sum_d2 += st.d2;
    legs += static_cast<long>(b.legs.size());
  }
  double log_accept = std::log(t0_new / t0) +
                      log_prior_t0(t0_new, prior) - log_prior_t0(t0, prior) -
                      0.5 * legs * nprime * std::log(t0_new / t0) -
                      0.5 * m * sum_d2 * (1.0 / t0_new - 1.0 / t0);
  if (log_accept < 0.0 && !sweep_rng.bernoulli(std::exp(log_accept))) return;

  state.t0 = t0_new;
  for (DatumBridge& b : state.bridges) {
    b.log_f = bridge_log_f(b, t0_new, m, nprime);
  }
  refresh_log_joint(state, prior);
  ++counters.t0_accepts;
}

double recompute_log_joint(const InferenceState& state, const Prior& prior) {
  int m = static_cast<int>(state.bridges.empty()
                               ? 0
                               : state.bridges[0].path.steps());
  int nprime = state.x0.n_taxa() - 3;
  double s = log_prior(state.x0, state.t0, prior);
  for (const DatumBridge& b : state.bridges) {
    for (int j = 1; j <= m; ++j) {
      TransitionStat st =
          transition_stat(b.path.points[j], b.path.points[j - 1]);
      s += transition_log_density(st, state.t0 / m, nprime);
    }
  }
  return s;
}

PosteriorTrace run_inference(std::span<const Tree> data, const Prior& prior,
                             const InferenceConfig& config, RngStream& rng) {
  PosteriorTrace trace;
  RngStream init_rng = rng.substream(0);
  InferenceState state = initialize(data, prior, config, init_rng);
  trace.init_t0 = state.t0;
  RngStream sweeps = rng.substream(1);

  for (long iter = 1; iter <= config.iters; ++iter) {
    step_bridges(state, config, sweeps.substream(3 * iter), trace.counters);
    if (!config.fix_x0) {
      step_x0(state, prior, config, sweeps.substream(3 * iter + 1),
              trace.counters);
    }
    step_t0(state, prior, config, sweeps.substream(3 * iter + 2),
            trace.counters);
    if (iter > config.burnin && (iter - config.burnin) % config.thin == 0) {
      if (config.verify_log_joint) {
        double fresh = recompute_log_joint(state, prior);
        trace.max_log_joint_drift = std::max(
            trace.max_log_joint_drift, std::fabs(fresh - state.log_joint));
      }
      trace.rows.push_back(
          {iter, state.t0, state.log_joint, state.x0.topology().hash()});
      trace.x0_samples.push_back(state.x0);
    }
  }
  trace.iters = config.iters;
  for (const Tree& x : trace.x0_samples) {
    uint64_t h = x.topology().hash();
    if (++trace.topology_counts[h] == 1) {
      trace.topology_examples[h] = to_newick(x);
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

std::vector<std::pair<int, long>> distinct_topology_diagnostic(
    const Tree& x0, double t0, std::span<const int> m_values, long walks,
    RngStream& rng) {
  std::vector<std::pair<int, long>> out;
  for (size_t k = 0; k < m_values.size(); ++k) {
    RngStream s = rng.substream(k);
    std::set<uint64_t> seen;
    for (long w = 0; w < walks; ++w) {
      RngStream ws = s.substream(w);
      WalkResult r = random_walk({x0, t0, m_values[k]}, ws);
      seen.insert(r.endpoint.topology().hash());
    }
    out.push_back({m_values[k], static_cast<long>(seen.size())});
  }
  return out;
}

}  // namespace bhv

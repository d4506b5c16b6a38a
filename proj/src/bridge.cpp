#include "bhv/bridge.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bhv {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Guided-component parameters for step r of an S-step sub-walk.
struct LegParams {
  Tree mu;
  double tau = 0.0;
  double weight = 0.0;
};

LegParams leg_params(const Tree& prev, const Tree& target, double step_var,
                     int steps, int r, const ProposalTuning& tuning,
                     BridgeCounters* counters) {
  Geodesic g = geodesic(prev, target);
  int p = 0;
  if (tuning.use_penalty) {
    p = path_penalty(g);
    if (p >= steps - r - 1) p = 0;
  }
  int denom = steps - r + 1 - p;
  if (denom < 2) {
    denom = 2;
    if (counters) ++counters->horizon_clamps;
  }
  double horizon = 1.0 / static_cast<double>(denom);
  double tau = (static_cast<double>(steps - r) / (steps - r + 1)) * step_var;

  Tree mu = g.at(horizon);
  if (auto hit = nearest_high_codim_point(g, horizon)) {
    mu = std::move(hit->second);
  }
  double w = mixture_weight(mu, tau, tuning.weight_floor);
  return {std::move(mu), tau, w};
}

double mixture_log_density(const Tree& y, const LegParams& params,
                           const TransitionStat& stat_from_prev,
                           double step_var, int nprime) {
  double guided = transition_log_density(transition_stat(y, params.mu),
                                         params.tau, nprime);
  double fallback = transition_log_density(stat_from_prev, step_var, nprime);
  return log_add_exp(std::log(params.weight) + guided,
                     std::log1p(-params.weight) + fallback);
}

}  // namespace

double schedule_variance(int j, int m, double t0) {
  if (j < 1 || j > m - 1) {
    throw std::invalid_argument("schedule_variance: j outside [1, m-1]");
  }
  return (static_cast<double>(m - j) / (m - j + 1)) * (t0 / m);
}

double mixture_weight(const Tree& mu, double tau, double floor) {
  if (!(tau > 0.0)) throw std::invalid_argument("mixture_weight: tau <= 0");
  int nprime = mu.n_taxa() - 3;
  double q = mu.norm();
  boost::math::chi_squared chi2(nprime);
  double w = boost::math::cdf(chi2, q * q / tau);
  // Keeping some fallback mass guarantees every valid sub-path has a
  // positive proposal density.
  return std::min(std::max(w, floor), 1.0 - 1e-6);
}

int path_penalty(const GeodesicClassification& cls) {
  int p = 0;
  for (int k : cls.high_codim) p += k;
  return p;
}

int path_penalty(const Geodesic& g) { return path_penalty(classify(g)); }

std::optional<SegmentProposal> propose_segment(const Tree& start,
                                               const Tree& target, double t0,
                                               int m, int steps,
                                               const ProposalTuning& tuning,
                                               RngStream& rng,
                                               BridgeCounters* counters) {
  int nprime = start.n_taxa() - 3;
  double step_var = t0 / m;
  SegmentProposal out;
  out.points.reserve(steps - 1);
  out.legs.reserve(steps);

  const Tree* prev = &start;
  for (int r = 1; r <= steps - 1; ++r) {
    LegParams params = leg_params(*prev, target, step_var, steps, r, tuning,
                                  counters);
    Tree y = rng.bernoulli(params.weight)
                 ? ggf_sample(params.mu, params.tau, rng)
                 : ggf_sample(*prev, step_var, rng);
    Geodesic leg = geodesic(*prev, y);
    TransitionStat stat = transition_stat(leg, y, *prev);
    if (!stat.valid) {
      if (counters) ++counters->step4_rejects;
      return std::nullopt;
    }
    out.log_q += mixture_log_density(y, params, stat, step_var, nprime);
    out.legs.push_back(stat);
    out.points.push_back(std::move(y));
    prev = &out.points.back();
  }
  out.legs.push_back(transition_stat(target, *prev));
  assert(static_cast<int>(out.legs.size()) == steps);
  return out;
}

double segment_log_q(const Tree& start, std::span<const Tree> interior,
                     const Tree& target, double t0, int m, int steps,
                     const ProposalTuning& tuning, BridgeCounters* counters) {
  assert(static_cast<int>(interior.size()) == steps - 1);
  int nprime = start.n_taxa() - 3;
  double step_var = t0 / m;
  double log_q = 0.0;
  const Tree* prev = &start;
  for (int r = 1; r <= steps - 1; ++r) {
    const Tree& y = interior[r - 1];
    LegParams params = leg_params(*prev, target, step_var, steps, r, tuning,
                                  counters);
    TransitionStat stat = transition_stat(y, *prev);
    log_q += mixture_log_density(y, params, stat, step_var, nprime);
    prev = &y;
  }
  return log_q;
}

std::optional<IndependenceProposal> propose_independence(
    const Tree& x0, const Tree& xstar, double t0, int m,
    const ProposalTuning& tuning, RngStream& rng, BridgeCounters* counters) {
  if (m < 2) throw std::invalid_argument("propose_independence: m < 2");
  if (!x0.is_resolved()) {
    throw std::invalid_argument("propose_independence: x0 not fully resolved");
  }
  auto seg = propose_segment(x0, xstar, t0, m, m, tuning, rng, counters);
  if (!seg) return std::nullopt;
  IndependenceProposal out;
  out.path.t0 = t0;
  out.path.points.reserve(m + 1);
  out.path.points.push_back(x0);
  for (Tree& t : seg->points) out.path.points.push_back(std::move(t));
  out.path.points.push_back(xstar);
  out.log_q = seg->log_q;
  out.legs = std::move(seg->legs);
  return out;
}

std::optional<PartialProposal> propose_partial(const BridgePath& current,
                                               int a, int l,
                                               const ProposalTuning& tuning,
                                               RngStream& rng,
                                               BridgeCounters* counters) {
  int m = current.steps();
  if (l < 1 || a < 0 || a + l > m - 1) {
    throw std::invalid_argument("propose_partial: segment outside bridge");
  }
  const Tree& start = current.points[a];
  const Tree& target = current.points[a + l + 1];
  auto seg = propose_segment(start, target, current.t0, m, l + 1, tuning, rng,
                             counters);
  if (!seg) return std::nullopt;
  double reverse = segment_log_q(
      start, std::span<const Tree>(current.points).subspan(a + 1, l), target,
      current.t0, m, l + 1, tuning, counters);
  PartialProposal out;
  out.a = a;
  out.l = l;
  out.points = std::move(seg->points);
  out.log_q_ratio = reverse - seg->log_q;
  out.legs = std::move(seg->legs);
  return out;
}

BridgeChain::BridgeChain(Tree x0, Tree xstar, double t0, int m,
                         ProposalTuning tuning, double beta)
    : x0_(std::move(x0)),
      xstar_(std::move(xstar)),
      t0_(t0),
      m_(m),
      nprime_(x0_.n_taxa() - 3),
      tuning_(tuning),
      beta_(beta) {
  if (m < 2) throw std::invalid_argument("BridgeChain: m < 2");
}

void BridgeChain::initialize(RngStream& rng, long attempt_cap) {
  for (long attempt = 1; attempt <= attempt_cap; ++attempt) {
    ++counters_.init_attempts;
    auto prop = propose_independence(x0_, xstar_, t0_, m_, tuning_, rng,
                                     &counters_);
    if (prop && prop->valid()) {
      state_ = std::move(prop->path);
      legs_ = std::move(prop->legs);
      rebuild_caches();
      has_state_ = true;
      return;
    }
  }
  throw BridgeInitError(
      "bridge initialization failed after " + std::to_string(attempt_cap) +
      " independence proposals (step-4 rejections: " +
      std::to_string(counters_.step4_rejects) + ")");
}

void BridgeChain::set_state(BridgePath path) {
  if (path.steps() != m_) throw std::invalid_argument("set_state: wrong length");
  state_ = std::move(path);
  legs_.clear();
  for (int j = 1; j <= m_; ++j) {
    legs_.push_back(transition_stat(state_.points[j], state_.points[j - 1]));
    if (!legs_.back().valid) {
      throw std::invalid_argument("set_state: invalid bridge");
    }
  }
  rebuild_caches();
  has_state_ = true;
}

void BridgeChain::set_beta(double beta) {
  beta_ = beta;
  if (beta_ < 1.0 && qind_legs_.empty() && has_state_) rebuild_caches();
}

void BridgeChain::rebuild_caches() {
  double step_var = t0_ / m_;
  log_f_ = 0.0;
  for (const TransitionStat& s : legs_) {
    log_f_ += transition_log_density(s, step_var, nprime_);
  }
  qind_legs_.clear();
  if (beta_ < 1.0) {
    for (int j = 1; j <= m_ - 1; ++j) {
      LegParams params = leg_params(state_.points[j - 1], xstar_, step_var, m_,
                                    j, tuning_, &counters_);
      TransitionStat stat = transition_stat(state_.points[j], state_.points[j - 1]);
      qind_legs_.push_back(mixture_log_density(state_.points[j], params, stat,
                                               step_var, nprime_));
    }
  }
}

double BridgeChain::log_q_ind() const {
  if (!qind_legs_.empty()) {
    double s = 0.0;
    for (double v : qind_legs_) s += v;
    return s;
  }
  BridgeCounters scratch;
  return segment_log_q(
      x0_, std::span<const Tree>(state_.points).subspan(1, m_ - 1), xstar_,
      t0_, m_, m_, tuning_, &scratch);
}

bool BridgeChain::step(RngStream& rng) {
  if (!has_state_) throw std::logic_error("BridgeChain: no state");
  ++counters_.proposals;
  int l = static_cast<int>(rng.trunc_geometric(tuning_.alpha_b, 1, m_ - 1));
  int a = static_cast<int>(rng.uniform_int(0, m_ - l - 1));
  auto prop = propose_partial(state_, a, l, tuning_, rng, &counters_);
  if (!prop) return false;

  double step_var = t0_ / m_;
  double delta_log_f = 0.0;
  for (int r = 0; r <= l; ++r) {
    double len = transition_log_density(prop->legs[r], step_var, nprime_);
    double old = transition_log_density(legs_[a + r], step_var, nprime_);
    delta_log_f += len - old;
  }
  if (delta_log_f == kNegInf) return false;  // reattachment leg invalid

  double log_accept;
  std::vector<double> new_qind;
  if (beta_ < 1.0) {
    int hi = std::min(a + l + 1, m_ - 1);
    double delta_qind = 0.0;
    BridgePath proposal = state_;
    for (int r = 0; r < l; ++r) proposal.points[a + 1 + r] = prop->points[r];
    for (int j = a + 1; j <= hi; ++j) {
      LegParams params = leg_params(proposal.points[j - 1], xstar_, step_var,
                                    m_, j, tuning_, &counters_);
      TransitionStat stat =
          transition_stat(proposal.points[j], proposal.points[j - 1]);
      double v = mixture_log_density(proposal.points[j], params, stat,
                                     step_var, nprime_);
      new_qind.push_back(v);
      delta_qind += v - qind_legs_[j - 1];
    }
    log_accept = beta_ * delta_log_f + (1.0 - beta_) * delta_qind +
                 prop->log_q_ratio;
  } else {
    log_accept = delta_log_f + prop->log_q_ratio;
  }

  if (log_accept < 0.0 && !rng.bernoulli(std::exp(log_accept))) return false;

  for (int r = 0; r < l; ++r) {
    state_.points[a + 1 + r] = std::move(prop->points[r]);
  }
  for (int r = 0; r <= l; ++r) legs_[a + r] = prop->legs[r];
  log_f_ += delta_log_f;
  if (beta_ < 1.0) {
    int hi = std::min(a + l + 1, m_ - 1);
    for (int j = a + 1; j <= hi; ++j) qind_legs_[j - 1] = new_qind[j - a - 1];
  }
  ++counters_.accepts;
  return true;
}

std::vector<BridgeSample> sample_bridges(const Tree& x0, const Tree& xstar,
                                         double t0, int m,
                                         const ProposalTuning& tuning,
                                         const BridgeSamplerOptions& opts,
                                         RngStream& rng,
                                         BridgeCounters* counters) {
  if (opts.thin < 1) throw std::invalid_argument("sample_bridges: thin < 1");
  BridgeChain chain(x0, xstar, t0, m, tuning);
  chain.initialize(rng, opts.init_cap);
  for (long i = 0; i < opts.burnin; ++i) chain.step(rng);
  std::vector<BridgeSample> out;
  out.reserve(opts.samples);
  long kept = 0;
  for (long i = 1; kept < opts.samples; ++i) {
    chain.step(rng);
    if (i % opts.thin == 0) {
      out.push_back({chain.state(), chain.log_f(), chain.log_q_ind()});
      ++kept;
    }
  }
  if (counters) *counters = chain.counters();
  return out;
}

}  // namespace bhv

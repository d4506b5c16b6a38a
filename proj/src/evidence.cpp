#include "bhv/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bhv/parallel.hpp"

namespace bhv {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

double log_mean_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s / v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// min{1, exp(x)} on the log scale, as a probability.
double acceptance(double log_ratio) {
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

ProposalTuning tuning_of(const EvidenceConfig& c) {
  ProposalTuning t;
  t.alpha_b = c.alpha_b;
  t.use_penalty = c.use_penalty;
  return t;
}

double exact_single_step(const Tree& xstar, const Tree& x0, double t0) {
  return transition_log_density(transition_stat(xstar, x0), t0,
                                xstar.n_taxa() - 3);
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double s2 = 0.0;
  for (double x : v) s2 += (x - mean) * (x - mean);
  return std::sqrt(s2 / (v.size() - 1));
}

}  // namespace

SharedMlSamples draw_shared_samples(const Tree& xstar, const Tree& x0,
                                    double t0, int m,
                                    const EvidenceConfig& config,
                                    RngStream& rng) {
  SharedMlSamples out;
  ProposalTuning tuning = tuning_of(config);

  BridgeSamplerOptions opts;
  opts.samples = config.m1;
  opts.burnin = config.burnin;
  opts.thin = config.thin;
  opts.init_cap = config.init_cap;
  RngStream post_rng = rng.substream(0);
  for (const BridgeSample& s :
       sample_bridges(x0, xstar, t0, m, tuning, opts, post_rng)) {
    out.post_log_f.push_back(s.log_f);
    out.post_log_q.push_back(s.log_q_ind);
  }

  RngStream prop_rng = rng.substream(1);
  for (int j = 0; j < config.m2; ++j) {
    RngStream s = prop_rng.substream(j);
    auto prop = propose_independence(x0, xstar, t0, m, tuning, s, nullptr);
    if (!prop) {
      // Aborted draw: the completed path would have zero target density.
      out.prop_log_f.push_back(kNegInf);
      out.prop_log_q.push_back(0.0);
      continue;
    }
    double log_f = 0.0;
    for (const TransitionStat& st : prop->legs) {
      log_f += transition_log_density(st, t0 / m, x0.n_taxa() - 3);
    }
    out.prop_log_f.push_back(log_f);
    out.prop_log_q.push_back(prop->log_q);
  }
  return out;
}

double chib_from_samples(const SharedMlSamples& s, const EvidenceConfig& config,
                         double* se, RngStream* boot_rng) {
  int m1 = static_cast<int>(s.post_log_f.size());
  int m2 = static_cast<int>(s.prop_log_f.size());
  int h = std::min(config.h, m1);
  int stride = m1 / h;

  std::vector<double> point_estimates;
  for (int k = 1; k <= h; ++k) {
    int idx = stride * k - 1;
    double f_star = s.post_log_f[idx];
    double q_star = s.post_log_q[idx];

    double num = 0.0;
    for (int j = 0; j < m1; ++j) {
      num += acceptance((f_star - s.post_log_f[j]) + (s.post_log_q[j] - q_star));
    }
    double den = 0.0;
    for (int j = 0; j < m2; ++j) {
      if (s.prop_log_f[j] == kNegInf) continue;  // A_ind = 0
      den += acceptance((s.prop_log_f[j] - f_star) + (q_star - s.prop_log_q[j]));
    }
    if (den == 0.0) {
      throw EstimatorError(
          "chib: all independence-proposal acceptance terms are zero");
    }
    double log_cond = q_star + std::log(num / m1) - std::log(den / m2);
    point_estimates.push_back(f_star - log_cond);
  }
  double est = log_mean_exp(point_estimates);

  if (se && boot_rng) {
    std::vector<double> boots;
    std::vector<double> resampled(point_estimates.size());
    for (int b = 0; b < config.bootstrap; ++b) {
      for (size_t i = 0; i < resampled.size(); ++i) {
        resampled[i] = point_estimates[boot_rng->uniform_int(
            0, static_cast<long>(point_estimates.size()) - 1)];
      }
      boots.push_back(log_mean_exp(resampled));
    }
    *se = sd_of(boots);
  }
  return est;
}

namespace {

double tunnel_iterate(std::span<const double> lf, std::span<const double> lq,
                      double l_center, double c1, double c2, double start,
                      int iterations) {
  double r = start;
  for (int k = 0; k < iterations; ++k) {
    double num = 0.0;
    for (double v : lq) {
      if (v == kNegInf) continue;
      double e = std::exp(v - l_center);
      num += e / (c2 * e + c1 * r);
    }
    num /= lq.size();
    double den = 0.0;
    for (double v : lf) {
      den += 1.0 / (c2 * std::exp(v - l_center) + c1 * r);
    }
    den /= lf.size();
    r = num / den;
    if (!std::isfinite(r) || r <= 0.0) {
      throw EstimatorError("tunnel: iterate diverged");
    }
  }
  return r;
}

}  // namespace

double tunnel_from_samples(const SharedMlSamples& s,
                           const EvidenceConfig& config, double* se,
                           RngStream* boot_rng) {
  int m1 = static_cast<int>(s.post_log_f.size());
  int m2 = static_cast<int>(s.prop_log_f.size());
  double c1 = static_cast<double>(m1) / (m1 + m2);
  double c2 = static_cast<double>(m2) / (m1 + m2);

  std::vector<double> lf(m1), lq(m2);
  for (int j = 0; j < m1; ++j) lf[j] = s.post_log_f[j] - s.post_log_q[j];
  for (int j = 0; j < m2; ++j) {
    lq[j] = s.prop_log_f[j] == kNegInf ? kNegInf
                                       : s.prop_log_f[j] - s.prop_log_q[j];
  }
  double l_center = median(lf);
  std::vector<double> lf_c(m1), lq_c(m2);
  for (int j = 0; j < m1; ++j) lf_c[j] = lf[j] - l_center;
  for (int j = 0; j < m2; ++j) {
    lq_c[j] = lq[j] == kNegInf ? kNegInf : lq[j] - l_center;
  }
  double r = tunnel_iterate(lf_c, lq_c, 0.0, c1, c2, 0.1, config.k_rungs);
  double est = std::log(r) + l_center;

  if (se && boot_rng) {
    std::vector<double> boots;
    std::vector<double> blf(m1), blq(m2);
    for (int b = 0; b < config.bootstrap; ++b) {
      for (int j = 0; j < m1; ++j) {
        blf[j] = lf_c[boot_rng->uniform_int(0, m1 - 1)];
      }
      for (int j = 0; j < m2; ++j) {
        blq[j] = lq_c[boot_rng->uniform_int(0, m2 - 1)];
      }
      boots.push_back(std::log(tunnel_iterate(blf, blq, 0.0, c1, c2, r, 15)) +
                      l_center);
    }
    *se = sd_of(boots);
  }
  return est;
}

namespace {

MlEstimate per_datum_sum(std::span<const Tree> data,
                         const std::function<std::pair<double, double>(
                             const Tree&, RngStream&)>& one,
                         const EvidenceConfig& config, RngStream& rng) {
  MlEstimate out;
  out.per_datum.resize(data.size());
  std::vector<double> ses(data.size());
  std::vector<RngStream> streams;
  for (size_t i = 0; i < data.size(); ++i) streams.push_back(rng.substream(i));
  parallel_for(static_cast<long>(data.size()), config.threads, [&](long i) {
    auto [est, se] = one(data[i], streams[i]);
    out.per_datum[i] = est;
    ses[i] = se;
  });
  double total = 0.0, var = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    total += out.per_datum[i];
    var += ses[i] * ses[i];
  }
  out.log_ml = total;
  out.se = std::sqrt(var);
  return out;
}

}  // namespace

MlEstimate chib_log_ml(std::span<const Tree> data, const Tree& x0, double t0,
                       int m, const EvidenceConfig& config, RngStream& rng) {
  if (m == 1) {
    MlEstimate out;
    for (const Tree& x : data) out.per_datum.push_back(exact_single_step(x, x0, t0));
    for (double v : out.per_datum) out.log_ml += v;
    return out;
  }
  return per_datum_sum(
      data,
      [&](const Tree& xstar, RngStream& s) {
        RngStream draw = s.substream(0);
        SharedMlSamples samples =
            draw_shared_samples(xstar, x0, t0, m, config, draw);
        RngStream boot = s.substream(1);
        double se = 0.0;
        double est = chib_from_samples(samples, config, &se, &boot);
        return std::make_pair(est, se);
      },
      config, rng);
}

MlEstimate tunnel_log_ml(std::span<const Tree> data, const Tree& x0, double t0,
                         int m, const EvidenceConfig& config, RngStream& rng) {
  if (m == 1) {
    MlEstimate out;
    for (const Tree& x : data) out.per_datum.push_back(exact_single_step(x, x0, t0));
    for (double v : out.per_datum) out.log_ml += v;
    return out;
  }
  return per_datum_sum(
      data,
      [&](const Tree& xstar, RngStream& s) {
        RngStream draw = s.substream(0);
        SharedMlSamples samples =
            draw_shared_samples(xstar, x0, t0, m, config, draw);
        RngStream boot = s.substream(1);
        double se = 0.0;
        double est = tunnel_from_samples(samples, config, &se, &boot);
        return std::make_pair(est, se);
      },
      config, rng);
}

namespace {

struct RungSummary {
  std::vector<double> log_ratio;  // log f - log q_ind per sample
};

double rung_estimate(const RungSummary& rung, double delta_beta, int index) {
  double eta = kNegInf;
  for (double lr : rung.log_ratio) eta = std::max(eta, lr);
  if (eta == kNegInf) {
    throw EstimatorError("stepping-stone: rung " + std::to_string(index) +
                         " has all-zero weights");
  }
  double s = 0.0;
  for (double lr : rung.log_ratio) {
    if (lr != kNegInf) s += std::exp(delta_beta * (lr - eta));
  }
  s /= rung.log_ratio.size();
  return delta_beta * eta + std::log(s);
}

std::pair<double, double> stepping_stone_single(
    const Tree& xstar, const Tree& x0, double t0, int m,
    const EvidenceConfig& config, RngStream& rng) {
  ProposalTuning tuning = tuning_of(config);
  int kr = config.k_rungs;
  int per_rung = config.ss_rung_samples > 0
                     ? config.ss_rung_samples
                     : std::max(20, config.m1 / std::max(1, kr));

  // Rung 1 samples come from the independence proposal directly.
  std::vector<RungSummary> rungs(kr);
  RngStream prop_rng = rng.substream(0);
  int nprime = x0.n_taxa() - 3;
  for (int j = 0; j < config.m2; ++j) {
    RngStream s = prop_rng.substream(j);
    auto prop = propose_independence(x0, xstar, t0, m, tuning, s, nullptr);
    if (!prop || !prop->valid()) {
      rungs[0].log_ratio.push_back(kNegInf);
      continue;
    }
    double log_f = 0.0;
    for (const TransitionStat& st : prop->legs) {
      log_f += transition_log_density(st, t0 / m, nprime);
    }
    rungs[0].log_ratio.push_back(log_f - prop->log_q);
  }

  // Quasistatic tempered chain feeds the remaining rungs.
  if (kr > 1) {
    RngStream chain_rng = rng.substream(1);
    BridgeChain chain(x0, xstar, t0, m, tuning, 1.0 / kr);
    chain.initialize(chain_rng, config.init_cap);
    for (int k = 2; k <= kr; ++k) {
      double beta_prev = static_cast<double>(k - 1) / kr;
      chain.set_beta(beta_prev);
      long burn = k == 2 ? config.ss_burnin : 0;
      for (long i = 0; i < burn; ++i) chain.step(chain_rng);
      for (int j = 0; j < per_rung; ++j) {
        for (int c = 0; c < config.ss_thin; ++c) chain.step(chain_rng);
        rungs[k - 1].log_ratio.push_back(chain.log_f() - chain.log_q_ind());
      }
    }
  }

  double total = 0.0;
  for (int k = 1; k <= kr; ++k) {
    total += rung_estimate(rungs[k - 1], 1.0 / kr, k);
  }

  // Bootstrap within rungs.
  RngStream boot = rng.substream(2);
  std::vector<double> boots;
  for (int b = 0; b < config.bootstrap; ++b) {
    double bt = 0.0;
    bool ok = true;
    for (int k = 1; k <= kr && ok; ++k) {
      const auto& lr = rungs[k - 1].log_ratio;
      RungSummary r2;
      r2.log_ratio.resize(lr.size());
      for (size_t j = 0; j < lr.size(); ++j) {
        r2.log_ratio[j] =
            lr[boot.uniform_int(0, static_cast<long>(lr.size()) - 1)];
      }
      try {
        bt += rung_estimate(r2, 1.0 / kr, k);
      } catch (const EstimatorError&) {
        ok = false;
      }
    }
    if (ok) boots.push_back(bt);
  }
  return {total, sd_of(boots)};
}

}  // namespace

MlEstimate stepping_stone_log_ml(std::span<const Tree> data, const Tree& x0,
                                 double t0, int m, const EvidenceConfig& config,
                                 RngStream& rng) {
  if (m == 1) {
    MlEstimate out;
    for (const Tree& x : data) out.per_datum.push_back(exact_single_step(x, x0, t0));
    for (double v : out.per_datum) out.log_ml += v;
    return out;
  }
  return per_datum_sum(
      data,
      [&](const Tree& xstar, RngStream& s) {
        return stepping_stone_single(xstar, x0, t0, m, config, s);
      },
      config, rng);
}

MlEstimate star_exact_log_ml(std::span<const Tree> data, double t0) {
  MlEstimate out;
  for (const Tree& x : data) {
    out.per_datum.push_back(star_source_log_density(x, t0));
    out.log_ml += out.per_datum.back();
  }
  return out;
}

double log_bayes_factor(double log_ml_a, double log_ml_b) {
  return (log_ml_a - log_ml_b) / std::log(10.0);
}

}  // namespace bhv

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bhv/bridge.hpp"

namespace bhv {

struct EstimatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvidenceConfig {
  int m1 = 2000;          // conditional-posterior sample size
  int m2 = 2000;          // independence-proposal sample size
  int h = 25;             // Chib evaluation bridges
  int k_rungs = 100;      // tunnel iterations / stepping-stone rungs
  long burnin = 500;      // conditional-chain burn-in
  int thin = 1;           // conditional-chain thinning
  int ss_rung_samples = 0;  // per-rung MCMC samples; 0 picks max(20, m1/K)
  long ss_burnin = 100;     // burn-in of the first tempered rung
  int ss_thin = 1;
  double alpha_b = 0.2;
  bool use_penalty = true;
  long init_cap = 100000;
  int bootstrap = 200;
  int threads = 1;
};

struct MlEstimate {
  double log_ml = 0.0;
  double se = 0.0;  // bootstrap standard error
  std::vector<double> per_datum;
};

// Per-datum scalar summaries of the two shared bridge sample sets; the
// Chib and tunnel estimators are both computed from these.
struct SharedMlSamples {
  std::vector<double> post_log_f, post_log_q;
  std::vector<double> prop_log_f, prop_log_q;  // log_f = -inf when invalid
};

SharedMlSamples draw_shared_samples(const Tree& xstar, const Tree& x0,
                                    double t0, int m,
                                    const EvidenceConfig& config,
                                    RngStream& rng);

double chib_from_samples(const SharedMlSamples& s, const EvidenceConfig& config,
                         double* se = nullptr, RngStream* boot_rng = nullptr);
double tunnel_from_samples(const SharedMlSamples& s,
                           const EvidenceConfig& config, double* se = nullptr,
                           RngStream* boot_rng = nullptr);

MlEstimate chib_log_ml(std::span<const Tree> data, const Tree& x0, double t0,
                       int m, const EvidenceConfig& config, RngStream& rng);
MlEstimate tunnel_log_ml(std::span<const Tree> data, const Tree& x0, double t0,
                         int m, const EvidenceConfig& config, RngStream& rng);
MlEstimate stepping_stone_log_ml(std::span<const Tree> data, const Tree& x0,
                                 double t0, int m, const EvidenceConfig& config,
                                 RngStream& rng);

// Exact marginal likelihood when the source is the star tree.
MlEstimate star_exact_log_ml(std::span<const Tree> data, double t0);

// Base-10 log Bayes factor.
double log_bayes_factor(double log_ml_a, double log_ml_b);

}  // namespace bhv

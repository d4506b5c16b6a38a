#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bhv/kernels.hpp"

namespace bhv {

struct ProposalTuning {
  double alpha_b = 0.2;     // truncated-geometric parameter for segment length
  bool use_penalty = true;  // singularity step budget on or off
  double weight_floor = 1e-3;
};

// An (m+1)-point random-walk path with pinned endpoints.
struct BridgePath {
  std::vector<Tree> points;
  double t0 = 0.0;
  int steps() const { return static_cast<int>(points.size()) - 1; }
};

struct BridgeCounters {
  uint64_t proposals = 0;
  uint64_t accepts = 0;
  uint64_t step4_rejects = 0;
  uint64_t horizon_clamps = 0;
  uint64_t init_attempts = 0;
};

struct BridgeInitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Var of the conditioned step j of an m-step walk: ((m-j)/(m-j+1)) t0/m.
double schedule_variance(int j, int m, double t0);

// Mixture weight for the guided component, a chi-square tail rule on the
// target point's distance from the origin, floored away from zero.
double mixture_weight(const Tree& mu, double tau, double floor = 1e-3);

// Step budget for winding around singularities: total codimension of the
// codim > 1 orthants the geodesic crosses.
int path_penalty(const GeodesicClassification& cls);
int path_penalty(const Geodesic& g);

// Guided proposal for the interior of an S-step sub-walk from start to
// target (per-step dispersion t0/m). Returns the S-1 sampled points, the
// forward proposal log density, and the S transition statistics of the
// legs including the final reattachment leg (which may be invalid; its
// zero target density is the caller's rejection signal). Absent when a
// sampled leg is itself invalid.
struct SegmentProposal {
  std::vector<Tree> points;
  double log_q = 0.0;
  std::vector<TransitionStat> legs;
};
std::optional<SegmentProposal> propose_segment(const Tree& start,
                                               const Tree& target, double t0,
                                               int m, int steps,
                                               const ProposalTuning& tuning,
                                               RngStream& rng,
                                               BridgeCounters* counters);

// Proposal density of an existing interior sequence under the same
// mechanism; finite for any valid sub-path thanks to the mixture floor.
double segment_log_q(const Tree& start, std::span<const Tree> interior,
                     const Tree& target, double t0, int m, int steps,
                     const ProposalTuning& tuning, BridgeCounters* counters);

// Full-bridge independence proposal. Returns the path and its forward
// log density; the path may still have an invalid final leg.
struct IndependenceProposal {
  BridgePath path;
  double log_q = 0.0;
  std::vector<TransitionStat> legs;  // m legs
  bool valid() const { return legs.back().valid; }
};
std::optional<IndependenceProposal> propose_independence(
    const Tree& x0, const Tree& xstar, double t0, int m,
    const ProposalTuning& tuning, RngStream& rng, BridgeCounters* counters);

// Partial proposal replacing points a+1..a+l of the current path.
struct PartialProposal {
  int a = 0;
  int l = 0;
  std::vector<Tree> points;          // the l replacement points
  double log_q_ratio = 0.0;          // reverse minus forward log density
  std::vector<TransitionStat> legs;  // l + 1 legs a+1..a+l+1
};
std::optional<PartialProposal> propose_partial(const BridgePath& current,
                                               int a, int l,
                                               const ProposalTuning& tuning,
                                               RngStream& rng,
                                               BridgeCounters* counters);

// Metropolis-Hastings chain over valid bridges. With beta < 1 the chain
// targets the tempered product f^beta * q_ind^(1-beta) used by the
// stepping-stone estimator.
class BridgeChain {
 public:
  BridgeChain(Tree x0, Tree xstar, double t0, int m, ProposalTuning tuning,
              double beta = 1.0);

  void initialize(RngStream& rng, long attempt_cap);
  void set_state(BridgePath path);
  void set_beta(double beta);

  bool step(RngStream& rng);  // returns true on accept

  const BridgePath& state() const { return state_; }
  double log_f() const { return log_f_; }     // target density, all m legs
  double log_q_ind() const;                   // independence density of state
  const BridgeCounters& counters() const { return counters_; }
  BridgeCounters& counters() { return counters_; }

 private:
  void rebuild_caches();

  Tree x0_;
  Tree xstar_;
  double t0_;
  int m_;
  int nprime_;
  ProposalTuning tuning_;
  double beta_;
  BridgePath state_;
  std::vector<TransitionStat> legs_;   // m entries
  std::vector<double> qind_legs_;      // m-1 entries, only kept when beta < 1
  double log_f_ = 0.0;
  BridgeCounters counters_;
  bool has_state_ = false;
};

struct BridgeSample {
  BridgePath path;
  double log_f = 0.0;
  double log_q_ind = 0.0;
};

struct BridgeSamplerOptions {
  long samples = 0;  // number of emitted (thinned) bridges
  long burnin = 0;
  int thin = 1;
  long init_cap = 100000;
};

std::vector<BridgeSample> sample_bridges(const Tree& x0, const Tree& xstar,
                                         double t0, int m,
                                         const ProposalTuning& tuning,
                                         const BridgeSamplerOptions& opts,
                                         RngStream& rng,
                                         BridgeCounters* counters = nullptr);

}  // namespace bhv

#pragma once

#include <cstdint>
#include <vector>

#include "bhv/geodesic.hpp"
#include "bhv/rng.hpp"
#include "bhv/treespace.hpp"

namespace bhv {

struct GgfParams {
  Tree center;
  double dispersion = 0.0;  // variance units, > 0
};

// Sufficient statistics of one transition density evaluation: the log
// density at dispersion t is pre - (N'/2) log(2 pi t) - d2 / (2 t),
// or -inf when the supporting geodesic is not simple.
struct TransitionStat {
  double d2 = 0.0;
  double pre = 0.0;  // log K(center) - nu * log 2
  bool valid = false;
};

TransitionStat transition_stat(const Tree& x, const Tree& center);
TransitionStat transition_stat(const Geodesic& g, const Tree& x,
                               const Tree& center);
double transition_log_density(const TransitionStat& stat, double t, int nprime);

// Gaussian-via-geodesic-firing sample: draws a Gaussian direction in the
// centre's orthant and extends a geodesic of matching length, branching
// uniformly at codimension-1 faces. Unresolved centres first draw a
// uniformly random resolving orthant with half-normal innovations on the
// created splits.
Tree ggf_sample(const Tree& center, double dispersion, RngStream& rng);
Tree ggf_sample(const GgfParams& p, RngStream& rng);

double ggf_log_density(const Tree& x, const GgfParams& p);
double ggf_density(const Tree& x, const GgfParams& p);

// Count of direction resamples forced by floating-point hits of
// codimension >= 2 faces (measure-zero events).
uint64_t ggf_degenerate_resamples();
void reset_ggf_degenerate_resamples();

struct WalkParams {
  Tree source;       // fully resolved
  double t0 = 0.0;   // total dispersion
  int m = 1;         // step count
};

struct WalkResult {
  Tree endpoint;
  std::vector<Tree> path;  // m + 1 trees, path.front() == source
};

WalkResult random_walk(const WalkParams& p, RngStream& rng);

// Exact Brownian transition density on the three-spider (N = 4), used
// as a validation oracle. Positions are distances from the origin.
double spider4_axis_density(int axis_y, double b, int axis_x0, double a,
                            double t0);
double spider4_density(const Tree& y, const Tree& x0, double t0);

// Exact Brownian transition density from the star tree, any N.
double star_source_log_density(const Tree& y, double t0);
double star_source_density(const Tree& y, double t0);

// Index of a BHV4 tree's axis among the three canonical splits, with
// its position; the star tree reports axis -1 at position 0.
std::pair<int, double> spider4_coordinates(const Tree& x);

}  // namespace bhv

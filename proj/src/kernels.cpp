#include "bhv/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bhv/tree_graph.hpp"

namespace bhv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2 = 0.69314718055994530942;
const double kNegInf = -std::numeric_limits<double>::infinity();

thread_local uint64_t g_degenerate_resamples = 0;

double gauss1d(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

}  // namespace

uint64_t ggf_degenerate_resamples() { return g_degenerate_resamples; }
void reset_ggf_degenerate_resamples() { g_degenerate_resamples = 0; }

TransitionStat transition_stat(const Geodesic& g, const Tree& x,
                               const Tree& center) {
  TransitionStat out;
  out.d2 = g.length() * g.length();
  GeodesicClassification cls = classify(g);
  bool interior_ok = cls.high_codim.empty();
  out.valid = x.is_resolved() && interior_ok;
  if (!out.valid) return out;
  double logk = center.is_resolved() ? 0.0 : log_resolution_factor(center);
  out.pre = logk - cls.nu * kLog2;
  return out;
}

TransitionStat transition_stat(const Tree& x, const Tree& center) {
  Geodesic g = geodesic(x, center);
  return transition_stat(g, x, center);
}

double transition_log_density(const TransitionStat& stat, double t, int nprime) {
  if (!stat.valid) return kNegInf;
  return stat.pre - 0.5 * nprime * std::log(2.0 * kPi * t) - stat.d2 / (2.0 * t);
}

double ggf_log_density(const Tree& x, const GgfParams& p) {
  if (!(p.dispersion > 0.0)) {
    throw std::invalid_argument("ggf_log_density: dispersion <= 0");
  }
  TransitionStat stat = transition_stat(x, p.center);
  return transition_log_density(stat, p.dispersion, x.n_taxa() - 3);
}

double ggf_density(const Tree& x, const GgfParams& p) {
  return std::exp(ggf_log_density(x, p));
}

namespace {

// One firing attempt; false when a codimension >= 2 face is hit exactly
// (caller redraws the direction).
bool fire_once(const TaxonSet& taxa, std::vector<Split>& splits,
               std::vector<double>& pos, std::vector<double>& dir,
               double remaining, RngStream& rng) {
  size_t k = splits.size();
  for (;;) {
    double s_min = std::numeric_limits<double>::infinity();
    double s_second = s_min;
    size_t cross = k;
    for (size_t i = 0; i < k; ++i) {
      if (dir[i] < 0.0) {
        double s = -pos[i] / dir[i];
        if (s < s_min) {
          s_second = s_min;
          s_min = s;
          cross = i;
        } else if (s < s_second) {
          s_second = s;
        }
      }
    }
    if (s_min >= remaining) {
      for (size_t i = 0; i < k; ++i) pos[i] += remaining * dir[i];
      for (size_t i = 0; i < k; ++i) {
        if (!(pos[i] > 0.0)) return false;  // landed exactly on a face
      }
      return true;
    }
    if (s_second - s_min <= 1e-12 * (1.0 + s_min)) return false;  // codim >= 2
    for (size_t i = 0; i < k; ++i) pos[i] += s_min * dir[i];
    pos[cross] = 0.0;
    auto alts = nni_alternatives(splits, splits[cross], taxa);
    splits[cross] = alts[rng.bernoulli(0.5) ? 1 : 0];
    dir[cross] = -dir[cross];
    remaining -= s_min;
  }
}

}  // namespace

Tree ggf_sample(const Tree& center, double dispersion, RngStream& rng) {
  if (!(dispersion > 0.0)) {
    throw std::invalid_argument("ggf_sample: dispersion <= 0");
  }
  const TaxonSet& taxa = *center.taxa();
  int nprime = center.n_taxa() - 3;
  double sd = std::sqrt(dispersion);

  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Split> splits(center.splits().begin(), center.splits().end());
    std::vector<double> pos(center.lengths().begin(), center.lengths().end());
    std::vector<double> dir;
    dir.reserve(nprime);
    for (size_t i = 0; i < splits.size(); ++i) dir.push_back(rng.normal(0.0, sd));
    if (!center.is_resolved()) {
      for (Split s : sample_resolution(center, rng)) {
        splits.push_back(s);
        pos.push_back(0.0);
        dir.push_back(std::fabs(rng.normal(0.0, sd)));
      }
    }
    assert(static_cast<int>(splits.size()) == nprime);
    double len2 = 0.0;
    for (double d : dir) len2 += d * d;
    double remaining = std::sqrt(len2);
    if (!(remaining > 0.0)) continue;
    for (double& d : dir) d /= remaining;

    if (fire_once(taxa, splits, pos, dir, remaining, rng)) {
      std::vector<std::pair<Split, double>> edges;
      edges.reserve(splits.size());
      for (size_t i = 0; i < splits.size(); ++i) edges.push_back({splits[i], pos[i]});
      return Tree(center.taxa(), std::move(edges));
    }
    ++g_degenerate_resamples;
  }
  throw std::runtime_error("ggf_sample: persistent degenerate firing");
}

Tree ggf_sample(const GgfParams& p, RngStream& rng) {
  return ggf_sample(p.center, p.dispersion, rng);
}

WalkResult random_walk(const WalkParams& p, RngStream& rng) {
  if (p.m < 1) throw std::invalid_argument("random_walk: m < 1");
  if (!(p.t0 > 0.0)) throw std::invalid_argument("random_walk: t0 <= 0");
  if (!p.source.is_resolved()) {
    throw std::invalid_argument("random_walk: source not fully resolved");
  }
  WalkResult out{p.source, {}};
  out.path.reserve(p.m + 1);
  out.path.push_back(p.source);
  double step = p.t0 / p.m;
  for (int j = 1; j <= p.m; ++j) {
    out.path.push_back(ggf_sample(out.path.back(), step, rng));
  }
  out.endpoint = out.path.back();
  return out;
}

std::pair<int, double> spider4_coordinates(const Tree& x) {
  if (x.n_taxa() != 4) {
    throw std::invalid_argument("spider4: tree is not on 4 taxa");
  }
  if (x.n_splits() == 0) return {-1, 0.0};
  if (x.n_splits() != 1) throw std::logic_error("spider4: malformed BHV4 tree");
  // The three canonical splits in mask order.
  uint64_t m = x.splits()[0].mask();
  int axis = m == 0x6 ? 0 : (m == 0xA ? 1 : 2);  // {23}, {24}, {34} sides
  return {axis, x.lengths()[0]};
}

double spider4_axis_density(int axis_y, double b, int axis_x0, double a,
                            double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("spider4: t0 <= 0");
  if (b < 0.0 || a < 0.0) throw std::invalid_argument("spider4: negative position");
  if (a == 0.0 || axis_y == axis_x0) {
    if (a == 0.0) return (2.0 / 3.0) * gauss1d(b, t0);
    return gauss1d(b - a, t0) - (1.0 / 3.0) * gauss1d(b + a, t0);
  }
  return (2.0 / 3.0) * gauss1d(b + a, t0);
}

double spider4_density(const Tree& y, const Tree& x0, double t0) {
  auto [ay, b] = spider4_coordinates(y);
  auto [ax, a] = spider4_coordinates(x0);
  if (ay < 0) ay = ax >= 0 ? ax : 0;  // star tree: all axes agree
  if (ax < 0) ax = ay;
  return spider4_axis_density(ay, b, ax, a, t0);
}

double star_source_log_density(const Tree& y, double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("star_source: t0 <= 0");
  if (!y.is_resolved()) {
    throw std::invalid_argument("star_source: y not fully resolved");
  }
  int n = y.n_taxa();
  int nprime = n - 3;
  double log_k = std::log(static_cast<double>(count_topologies(n)));
  double norm = y.norm();
  return nprime * kLog2 - log_k - 0.5 * nprime * std::log(2.0 * kPi * t0) -
         norm * norm / (2.0 * t0);
}

double star_source_density(const Tree& y, double t0) {
  return std::exp(star_source_log_density(y, t0));
}

}  // namespace bhv

#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bhv/rng.hpp"
#include "bhv/treespace.hpp"

namespace bhv {

// A split carried along the whole geodesic, interpolating linearly.
// Covers splits present in both trees and splits of one tree compatible
// with the whole other tree (their far-end length is zero).
struct CommonEdge {
  Split split;
  double source_len = 0.0;
  double target_len = 0.0;
};

// One leg transition of the support: `drop` splits contract to zero and
// `gain` splits expand from zero at parameter crossing().
struct SupportPair {
  std::vector<Split> drop;
  std::vector<double> drop_len;
  std::vector<Split> gain;
  std::vector<double> gain_len;
  double drop_norm = 0.0;
  double gain_norm = 0.0;

  double ratio() const { return drop_norm / gain_norm; }
  double crossing() const { return drop_norm / (drop_norm + gain_norm); }
};

class Geodesic {
 public:
  Geodesic(Tree source, Tree target, std::vector<CommonEdge> commons,
           std::vector<SupportPair> pairs);

  const Tree& source() const { return source_; }
  const Tree& target() const { return target_; }
  double length() const { return length_; }
  const std::vector<CommonEdge>& commons() const { return commons_; }
  const std::vector<SupportPair>& pairs() const { return pairs_; }

  // Point at arc-length fraction t; may be unresolved at crossings.
  Tree at(double t) const;

 private:
  Tree source_;
  Tree target_;
  std::vector<CommonEdge> commons_;
  std::vector<SupportPair> pairs_;  // sorted by crossing parameter
  double length_ = 0.0;
};

Geodesic geodesic(const Tree& source, const Tree& target);
double bhv_distance(const Tree& a, const Tree& b);

struct Crossing {
  double t = 0.0;
  int codim = 0;
};

struct GeodesicClassification {
  std::vector<Crossing> crossings;  // interior transitions, by parameter
  int nu = 0;                       // codimension-1 crossings
  bool is_simple = false;
  bool is_cone_path = false;
  std::vector<int> high_codim;      // codimensions > 1, in path order
};

GeodesicClassification classify(const Geodesic& g);

// Earliest crossing with codimension >= 2 at parameter <= t_max.
std::optional<std::pair<double, Tree>> nearest_high_codim_point(
    const Geodesic& g, double t_max);

// Sturm's iteration. Returns the iterate and the empirical variance
// (mean squared distance from the returned point to the data).
std::pair<Tree, double> frechet_mean(std::span<const Tree> data,
                                     long iterations, RngStream& rng);

}  // namespace bhv

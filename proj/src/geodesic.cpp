#include "bhv/geodesic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>

namespace bhv {

namespace {

constexpr double kCoverTol = 1e-10;
constexpr double kCrossingGroupTol = 1e-9;

// Minimum-weight vertex cover of a bipartite graph via max flow
// (source -> lhs -> rhs -> sink, incompatibility edges uncuttable).
struct CoverResult {
  double weight = 0.0;
  std::vector<char> lhs_in_cover;
  std::vector<char> rhs_in_cover;
};

CoverResult min_vertex_cover(const std::vector<double>& lhs_weight,
                             const std::vector<double>& rhs_weight,
                             const std::vector<std::pair<int, int>>& edges) {
  int na = static_cast<int>(lhs_weight.size());
  int nb = static_cast<int>(rhs_weight.size());
  int source = na + nb;
  int sink = na + nb + 1;
  int v = na + nb + 2;
  std::vector<double> cap(static_cast<size_t>(v) * v, 0.0);
  auto at = [&](int i, int j) -> double& { return cap[static_cast<size_t>(i) * v + j]; };
  for (int i = 0; i < na; ++i) at(source, i) = lhs_weight[i];
  for (int j = 0; j < nb; ++j) at(na + j, sink) = rhs_weight[j];
  for (auto [i, j] : edges) at(i, na + j) = 4.0;  // larger than any cover

  double flow = 0.0;
  std::vector<int> prev(v);
  for (;;) {
    std::fill(prev.begin(), prev.end(), -1);
    prev[source] = source;
    std::queue<int> q;
    q.push(source);
    while (!q.empty() && prev[sink] < 0) {
      int x = q.front();
      q.pop();
      for (int y = 0; y < v; ++y) {
        if (prev[y] < 0 && at(x, y) > 1e-15) {
          prev[y] = x;
          q.push(y);
        }
      }
    }
    if (prev[sink] < 0) break;
    double bottleneck = 1e300;
    for (int y = sink; y != source; y = prev[y]) {
      bottleneck = std::min(bottleneck, at(prev[y], y));
    }
    for (int y = sink; y != source; y = prev[y]) {
      at(prev[y], y) -= bottleneck;
      at(y, prev[y]) += bottleneck;
    }
    flow += bottleneck;
  }

  // Reachable side of the min cut.
  std::vector<char> reach(v, 0);
  reach[source] = 1;
  std::queue<int> q;
  q.push(source);
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int y = 0; y < v; ++y) {
      if (!reach[y] && at(x, y) > 1e-15) {
        reach[y] = 1;
        q.push(y);
      }
    }
  }
  CoverResult out;
  out.weight = flow;
  out.lhs_in_cover.assign(na, 0);
  out.rhs_in_cover.assign(nb, 0);
  for (int i = 0; i < na; ++i) out.lhs_in_cover[i] = !reach[i];
  for (int j = 0; j < nb; ++j) out.rhs_in_cover[j] = reach[na + j];
  return out;
}

}  // namespace

Geodesic::Geodesic(Tree source, Tree target, std::vector<CommonEdge> commons,
                   std::vector<SupportPair> pairs)
    : source_(std::move(source)),
      target_(std::move(target)),
      commons_(std::move(commons)),
      pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end(),
            [](const SupportPair& a, const SupportPair& b) {
              return a.crossing() < b.crossing();
            });
  double s2 = 0.0;
  for (const CommonEdge& c : commons_) {
    double d = c.source_len - c.target_len;
    s2 += d * d;
  }
  for (const SupportPair& p : pairs_) {
    double d = p.drop_norm + p.gain_norm;
    s2 += d * d;
  }
  length_ = std::sqrt(s2);
}

Tree Geodesic::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("Geodesic::at: t outside [0,1]");
  }
  if (t == 0.0) return source_;
  if (t == 1.0) return target_;
  std::vector<std::pair<Split, double>> edges;
  for (const CommonEdge& c : commons_) {
    double len = (1.0 - t) * c.source_len + t * c.target_len;
    if (len > 0.0) edges.push_back({c.split, len});
  }
  for (const SupportPair& p : pairs_) {
    double tc = p.crossing();
    if (t < tc) {
      double f = (tc - t) / tc;
      for (size_t i = 0; i < p.drop.size(); ++i) {
        double len = p.drop_len[i] * f;
        if (len > 0.0) edges.push_back({p.drop[i], len});
      }
    } else if (t > tc) {
      double f = (t - tc) / (1.0 - tc);
      for (size_t i = 0; i < p.gain.size(); ++i) {
        double len = p.gain_len[i] * f;
        if (len > 0.0) edges.push_back({p.gain[i], len});
      }
    }
  }
  return Tree(source_.taxa(), std::move(edges));
}

Geodesic geodesic(const Tree& source, const Tree& target) {
  if (!(*source.taxa() == *target.taxa())) {
    throw std::invalid_argument("geodesic: mismatched taxon sets");
  }

  std::vector<CommonEdge> commons;
  std::vector<Split> lhs, rhs;
  std::vector<double> lhs_len, rhs_len;

  for (size_t i = 0; i < source.splits().size(); ++i) {
    Split e = source.splits()[i];
    bool common = true;
    for (Split f : target.splits()) {
      if (!splits_compatible(e, f)) {
        common = false;
        break;
      }
    }
    if (common) {
      commons.push_back({e, source.lengths()[i], target.length(e)});
    } else {
      lhs.push_back(e);
      lhs_len.push_back(source.lengths()[i]);
    }
  }
  for (size_t i = 0; i < target.splits().size(); ++i) {
    Split f = target.splits()[i];
    if (source.has(f)) continue;
    bool common = true;
    for (Split e : source.splits()) {
      if (!splits_compatible(e, f)) {
        common = false;
        break;
      }
    }
    if (common) {
      commons.push_back({f, 0.0, target.lengths()[i]});
    } else {
      rhs.push_back(f);
      rhs_len.push_back(target.lengths()[i]);
    }
  }

  // Support refinement: start from the cone-path support and split
  // pairs while a vertex cover of the incompatibility graph certifies a
  // strictly better (ratio-ordered) decomposition.
  std::vector<SupportPair> final_pairs;
  struct Work {
    std::vector<int> a, b;
  };
  std::deque<Work> queue;
  if (!lhs.empty()) {
    Work w;
    for (size_t i = 0; i < lhs.size(); ++i) w.a.push_back(static_cast<int>(i));
    for (size_t i = 0; i < rhs.size(); ++i) w.b.push_back(static_cast<int>(i));
    assert(!w.b.empty());
    queue.push_back(std::move(w));
  }
  while (!queue.empty()) {
    Work w = std::move(queue.front());
    queue.pop_front();
    double norm_a2 = 0.0, norm_b2 = 0.0;
    for (int i : w.a) norm_a2 += lhs_len[i] * lhs_len[i];
    for (int j : w.b) norm_b2 += rhs_len[j] * rhs_len[j];

    std::vector<double> wa(w.a.size()), wb(w.b.size());
    for (size_t i = 0; i < w.a.size(); ++i) {
      wa[i] = lhs_len[w.a[i]] * lhs_len[w.a[i]] / norm_a2;
    }
    for (size_t j = 0; j < w.b.size(); ++j) {
      wb[j] = rhs_len[w.b[j]] * rhs_len[w.b[j]] / norm_b2;
    }
    std::vector<std::pair<int, int>> edges;
    for (size_t i = 0; i < w.a.size(); ++i) {
      for (size_t j = 0; j < w.b.size(); ++j) {
        if (!splits_compatible(lhs[w.a[i]], rhs[w.b[j]])) {
          edges.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
      }
    }

    bool refined = false;
    if (!edges.empty()) {
      CoverResult cover = min_vertex_cover(wa, wb, edges);
      if (cover.weight < 1.0 - kCoverTol) {
        Work first, second;
        for (size_t i = 0; i < w.a.size(); ++i) {
          (cover.lhs_in_cover[i] ? first : second).a.push_back(w.a[i]);
        }
        for (size_t j = 0; j < w.b.size(); ++j) {
          (cover.rhs_in_cover[j] ? second : first).b.push_back(w.b[j]);
        }
        if (!first.a.empty() && !first.b.empty() && !second.a.empty() &&
            !second.b.empty()) {
          queue.push_back(std::move(first));
          queue.push_back(std::move(second));
          refined = true;
        }
      }
    }
    if (!refined) {
      SupportPair p;
      for (int i : w.a) {
        p.drop.push_back(lhs[i]);
        p.drop_len.push_back(lhs_len[i]);
      }
      for (int j : w.b) {
        p.gain.push_back(rhs[j]);
        p.gain_len.push_back(rhs_len[j]);
      }
      p.drop_norm = std::sqrt(norm_a2);
      p.gain_norm = std::sqrt(norm_b2);
      final_pairs.push_back(std::move(p));
    }
  }

  return Geodesic(source, target, std::move(commons), std::move(final_pairs));
}

double bhv_distance(const Tree& a, const Tree& b) {
  return geodesic(a, b).length();
}

GeodesicClassification classify(const Geodesic& g) {
  GeodesicClassification out;
  const auto& pairs = g.pairs();
  int nprime = g.source().n_taxa() - 3;

  size_t i = 0;
  while (i < pairs.size()) {
    size_t j = i;
    double t = pairs[i].crossing();
    while (j + 1 < pairs.size() &&
           pairs[j + 1].crossing() - t <= kCrossingGroupTol) {
      ++j;
    }
    int positive = static_cast<int>(g.commons().size());
    for (size_t k = 0; k < pairs.size(); ++k) {
      if (k >= i && k <= j) continue;
      positive += static_cast<int>(pairs[k].crossing() > t ? pairs[k].drop.size()
                                                           : pairs[k].gain.size());
    }
    int codim = nprime - positive;
    out.crossings.push_back({t, codim});
    if (codim == 1) ++out.nu;
    if (codim >= 2) out.high_codim.push_back(codim);
    i = j + 1;
  }

  bool endpoints_resolved = g.source().is_resolved() && g.target().is_resolved();
  bool interior_ok = true;
  for (const Crossing& c : out.crossings) {
    if (c.codim >= 2) interior_ok = false;
  }
  out.is_simple = endpoints_resolved && interior_ok;
  out.is_cone_path = g.commons().empty() && pairs.size() == 1 &&
                     !pairs[0].drop.empty() && !pairs[0].gain.empty();
  return out;
}

std::optional<std::pair<double, Tree>> nearest_high_codim_point(
    const Geodesic& g, double t_max) {
  if (!(t_max > 0.0 && t_max <= 1.0)) {
    throw std::invalid_argument("nearest_high_codim_point: bad t_max");
  }
  GeodesicClassification cls = classify(g);
  for (const Crossing& c : cls.crossings) {
    if (c.codim >= 2 && c.t <= t_max + 1e-12) {
      return std::make_pair(c.t, g.at(c.t));
    }
  }
  return std::nullopt;
}

std::pair<Tree, double> frechet_mean(std::span<const Tree> data,
                                     long iterations, RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("frechet_mean: empty data");
  if (iterations < 1) throw std::invalid_argument("frechet_mean: iterations < 1");
  long n = static_cast<long>(data.size());
  Tree z = data[rng.uniform_int(0, n - 1)];
  for (long k = 0; k < iterations; ++k) {
    const Tree& x = data[rng.uniform_int(0, n - 1)];
    z = geodesic(z, x).at(1.0 / static_cast<double>(k + 2));
  }
  double var = 0.0;
  for (const Tree& x : data) {
    double d = bhv_distance(z, x);
    var += d * d;
  }
  var /= static_cast<double>(n);
  return {std::move(z), var};
}

}  // namespace bhv

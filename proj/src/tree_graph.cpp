#include "bhv/tree_graph.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace bhv {

namespace {

TreeGraph build_graph_impl(std::span<const Split> splits,
                           std::span<const double> lengths, int n_taxa) {
  TreeGraph g;
  g.n_taxa = n_taxa;
  uint64_t full = (uint64_t{1} << n_taxa) - 1;

  // Clusters sorted by size; parent of a cluster is its smallest strict
  // superset (the split sides form a laminar family).
  std::vector<int> order(splits.size());
  for (size_t i = 0; i < splits.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return splits[a].side_size() < splits[b].side_size();
  });

  g.nodes.resize(splits.size() + 1);
  g.nodes[0].mask = full;
  std::vector<int> node_of(splits.size());
  for (size_t oi = 0; oi < order.size(); ++oi) {
    int si = order[oi];
    int id = static_cast<int>(oi) + 1;
    node_of[si] = id;
    g.nodes[id].mask = splits[si].mask();
    g.nodes[id].parent_len = lengths.empty() ? 0.0 : lengths[si];
  }
  // Parents: smallest enclosing cluster, else the root.
  for (size_t oi = 0; oi < order.size(); ++oi) {
    int id = static_cast<int>(oi) + 1;
    uint64_t m = g.nodes[id].mask;
    int parent = 0;
    for (size_t oj = oi + 1; oj < order.size(); ++oj) {
      int cand = static_cast<int>(oj) + 1;
      if ((m & ~g.nodes[cand].mask) == 0) {
        parent = cand;
        break;
      }
    }
    g.nodes[id].parent = parent;
    g.nodes[parent].children.push_back(id);
  }
  // Leaves hang off the smallest cluster containing them.
  for (int t = 0; t < n_taxa; ++t) {
    uint64_t bit = uint64_t{1} << t;
    int parent = 0;
    for (size_t oi = 0; oi < order.size(); ++oi) {
      int cand = static_cast<int>(oi) + 1;
      if (g.nodes[cand].mask & bit) {
        parent = cand;
        break;
      }
    }
    int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({});
    g.nodes[id].parent = parent;
    g.nodes[id].mask = bit;
    g.nodes[id].leaf = t;
    g.nodes[parent].children.push_back(id);
  }
  return g;
}

uint64_t double_factorial(int n) {  // n odd
  uint64_t r = 1;
  for (int k = n; k > 1; k -= 2) r *= static_cast<uint64_t>(k);
  return r;
}

}  // namespace

TreeGraph build_tree_graph(const Tree& tree) {
  return build_graph_impl(tree.splits(), tree.lengths(), tree.n_taxa());
}

TreeGraph build_tree_graph(const Topology& topology, const TaxonSet& taxa) {
  return build_graph_impl(topology.splits(), {}, taxa.size());
}

std::vector<int> resolution_profile(const Tree& tree) {
  TreeGraph g = build_tree_graph(tree);
  std::vector<int> profile;
  for (size_t v = 0; v < g.nodes.size(); ++v) {
    if (g.nodes[v].leaf >= 0) continue;
    int d = g.degree(static_cast<int>(v));
    if (d > 3) profile.push_back(d - 3);
  }
  return profile;
}

uint64_t resolution_count(const Tree& tree) {
  uint64_t delta = 1;
  for (int a : resolution_profile(tree)) delta *= double_factorial(2 * a + 1);
  return delta;
}

double log_resolution_factor(const Tree& tree) {
  double log_delta = 0.0;
  int sum_alpha = 0;
  for (int a : resolution_profile(tree)) {
    sum_alpha += a;
    log_delta += std::log(static_cast<double>(double_factorial(2 * a + 1)));
  }
  return sum_alpha * std::log(2.0) - log_delta;
}

namespace {

// Local scaffold used when expanding one high-degree vertex: a small
// binary tree whose leaves are the neighbour groups.
struct LocalTree {
  struct LNode {
    uint64_t group = 0;  // taxa behind this neighbour, 0 for new vertices
    std::vector<int> adj;
  };
  std::vector<LNode> nodes;
  std::vector<std::pair<int, int>> edges;

  int add_node(uint64_t group) {
    nodes.push_back({group, {}});
    return static_cast<int>(nodes.size()) - 1;
  }
  int add_edge(int a, int b) {
    nodes[a].adj.push_back(b);
    nodes[b].adj.push_back(a);
    edges.push_back({a, b});
    return static_cast<int>(edges.size()) - 1;
  }
  void remove_edge(int ei) {
    auto [a, b] = edges[ei];
    std::erase(nodes[a].adj, b);
    std::erase(nodes[b].adj, a);
    edges[ei] = {-1, -1};
  }
  uint64_t group_mask_below(int from, int to) const {
    // Union of groups reachable from `to` without crossing back to `from`.
    uint64_t m = nodes[to].group;
    for (int nb : nodes[to].adj) {
      if (nb != from) m |= group_mask_below(to, nb);
    }
    return m;
  }
};

}  // namespace

std::vector<Split> sample_resolution(const Tree& tree, RngStream& rng) {
  TreeGraph g = build_tree_graph(tree);
  const TaxonSet& taxa = *tree.taxa();
  uint64_t full = taxa.full_mask();
  std::vector<Split> created;

  for (size_t v = 0; v < g.nodes.size(); ++v) {
    if (g.nodes[v].leaf >= 0) continue;
    int d = g.degree(static_cast<int>(v));
    if (d <= 3) continue;

    // Neighbour groups: children subtrees plus, for non-root vertices,
    // everything on the parent side.
    std::vector<uint64_t> groups;
    for (int c : g.nodes[v].children) groups.push_back(g.nodes[c].mask);
    if (g.nodes[v].parent >= 0) groups.push_back(full & ~g.nodes[v].mask);

    // Random insertion order: the first three seed a star, the rest due
    // to be attached to uniformly chosen existing edges.
    std::vector<int> perm(groups.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (size_t i = 0; i < perm.size(); ++i) {
      long j = rng.uniform_int(static_cast<long>(i),
                               static_cast<long>(perm.size()) - 1);
      std::swap(perm[i], perm[j]);
    }

    LocalTree lt;
    std::vector<int> leaf_ids(groups.size());
    for (size_t i = 0; i < groups.size(); ++i) {
      leaf_ids[i] = lt.add_node(groups[i]);
    }
    int hub = lt.add_node(0);
    std::vector<int> live_edges;
    for (int k = 0; k < 3; ++k) {
      live_edges.push_back(lt.add_edge(hub, leaf_ids[perm[k]]));
    }
    for (size_t k = 3; k < groups.size(); ++k) {
      long pick = rng.uniform_int(0, static_cast<long>(live_edges.size()) - 1);
      int ei = live_edges[pick];
      auto [a, b] = lt.edges[ei];
      lt.remove_edge(ei);
      live_edges[pick] = live_edges.back();
      live_edges.pop_back();
      int mid = lt.add_node(0);
      live_edges.push_back(lt.add_edge(a, mid));
      live_edges.push_back(lt.add_edge(mid, b));
      live_edges.push_back(lt.add_edge(mid, leaf_ids[perm[k]]));
    }

    // Internal edges of the scaffold are the new splits.
    int found = 0;
    for (auto [a, b] : lt.edges) {
      if (a < 0) continue;
      if (lt.nodes[a].group != 0 || lt.nodes[b].group != 0) continue;
      uint64_t side = lt.group_mask_below(a, b);
      created.push_back(Split(side, taxa));
      ++found;
    }
    assert(found == d - 3);
    (void)found;
  }
  return created;
}

std::array<Split, 2> nni_alternatives(std::span<const Split> splits, Split e,
                                      const TaxonSet& taxa) {
  uint64_t full = taxa.full_mask();
  uint64_t A = e.mask();        // side without taxon 0
  uint64_t B = full & ~A;

  // Maximal clusters strictly inside each side; singletons fill gaps.
  auto side_groups = [&](uint64_t side) {
    std::vector<uint64_t> cands;
    for (const Split& f : splits) {
      if (f == e) continue;
      uint64_t m = f.mask();
      if ((m & ~side) == 0 && m != side) {
        cands.push_back(m);
      } else {
        uint64_t c = full & ~m;
        if ((c & ~side) == 0 && c != side) cands.push_back(c);
      }
    }
    uint64_t rest = side;
    std::vector<uint64_t> groups;
    std::sort(cands.begin(), cands.end(), [](uint64_t a, uint64_t b) {
      return std::popcount(a) > std::popcount(b);
    });
    for (uint64_t m : cands) {
      if ((m & rest) == m) {  // maximal: not inside an already-taken group
        groups.push_back(m);
        rest &= ~m;
      }
    }
    while (rest) {
      uint64_t bit = rest & (~rest + 1);
      groups.push_back(bit);
      rest &= ~bit;
    }
    return groups;
  };

  std::vector<uint64_t> ga = side_groups(A);
  std::vector<uint64_t> gb = side_groups(B);
  if (ga.size() != 2 || gb.size() != 2) {
    throw std::logic_error("nni_alternatives: tree not resolved at split");
  }
  return {Split(ga[0] | gb[0], taxa), Split(ga[0] | gb[1], taxa)};
}

}  // namespace bhv

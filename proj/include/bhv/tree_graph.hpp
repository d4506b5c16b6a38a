#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bhv/rng.hpp"
#include "bhv/treespace.hpp"

namespace bhv {

// Explicit rooted view of the tree induced by a split set. Rooted at the
// internal vertex adjacent to taxon 0; every internal non-root node
// corresponds to one split (the cluster of taxa below it).
struct TreeGraph {
  struct Node {
    int parent = -1;
    std::vector<int> children;
    uint64_t mask = 0;        // taxa below this node
    int leaf = -1;            // taxon index, or -1 for internal nodes
    double parent_len = 0.0;  // interior edge length (internal nodes only)
  };
  std::vector<Node> nodes;    // node 0 is the root
  int n_taxa = 0;

  int degree(int v) const {
    const Node& n = nodes[v];
    return static_cast<int>(n.children.size()) + (n.parent >= 0 ? 1 : 0);
  }
};

TreeGraph build_tree_graph(const Tree& tree);
TreeGraph build_tree_graph(const Topology& topology, const TaxonSet& taxa);

// Degrees-above-3 of the internal vertices (one entry per vertex with
// degree > 3, value deg - 3). Empty for fully resolved trees.
std::vector<int> resolution_profile(const Tree& tree);

// Number of fully resolved topologies containing the tree's topology in
// their closure: the product of (2a+1)!! over the profile.
uint64_t resolution_count(const Tree& tree);

// log of 2^{sum a} / resolution_count, the density correction for
// sampling from an unresolved centre.
double log_resolution_factor(const Tree& tree);

// Draws a uniformly random fully resolved topology containing the
// tree's topology; returns the newly created splits.
std::vector<Split> sample_resolution(const Tree& tree, RngStream& rng);

// The two alternative splits obtainable by contracting `e` in a fully
// resolved topology and re-expanding the degree-4 vertex.
std::array<Split, 2> nni_alternatives(std::span<const Split> splits, Split e,
                                      const TaxonSet& taxa);

}  // namespace bhv

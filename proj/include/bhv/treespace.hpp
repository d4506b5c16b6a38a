#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bhv {

constexpr double kLengthEps = 1e-12;  // interior lengths below this are zero

// Fixed, ordered set of taxon labels. The label order defines the
// canonical split encoding, so it must not change after construction.
class TaxonSet {
 public:
  explicit TaxonSet(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<int> index_of(const std::string& label) const;
  uint64_t full_mask() const { return (uint64_t{1} << size()) - 1; }

  bool operator==(const TaxonSet& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
};

using TaxonSetPtr = std::shared_ptr<const TaxonSet>;

// Taxa labelled "1".."N", the convention used throughout the tests.
TaxonSetPtr numeric_taxa(int n);

// A bipartition of the taxon set, stored as the bitmask of the side that
// does not contain taxon 0. That makes equality and hashing O(1), and
// reduces compatibility to a disjoint-or-nested test.
class Split {
 public:
  Split(uint64_t side, const TaxonSet& taxa);
  static Split from_canonical(uint64_t side) { return Split(side); }

  uint64_t mask() const { return side_; }
  int side_size() const;

  auto operator<=>(const Split&) const = default;

 private:
  explicit Split(uint64_t side) : side_(side) {}
  uint64_t side_ = 0;
};

// True when the two bipartitions can coexist in one tree: at least one
// of the four pairwise intersections of sides is empty. With the
// canonical encoding this is exactly disjoint-or-nested.
bool splits_compatible(Split a, Split b);

// Pairwise compatibility of a whole set.
bool all_compatible(std::span<const Split> splits);

class Topology {
 public:
  Topology() = default;
  Topology(std::vector<Split> splits, int n_taxa);

  const std::vector<Split>& splits() const { return splits_; }
  int n_splits() const { return static_cast<int>(splits_.size()); }
  int codimension() const { return n_taxa_ - 3 - n_splits(); }
  bool contains(Split s) const;
  uint64_t hash() const;  // stable across runs and platforms

  bool operator==(const Topology& other) const {
    return splits_ == other.splits_;
  }

 private:
  std::vector<Split> splits_;  // sorted
  int n_taxa_ = 0;
};

// A point of tree space: a pairwise-compatible set of splits with
// strictly positive lengths. Immutable after construction; absent
// splits have implicit length zero.
class Tree {
 public:
  Tree(TaxonSetPtr taxa, std::vector<std::pair<Split, double>> edges);

  const TaxonSetPtr& taxa() const { return taxa_; }
  int n_taxa() const { return taxa_->size(); }
  int n_splits() const { return static_cast<int>(splits_.size()); }
  bool is_resolved() const { return n_splits() == n_taxa() - 3; }
  bool is_star() const { return splits_.empty(); }

  std::span<const Split> splits() const { return splits_; }
  std::span<const double> lengths() const { return lengths_; }
  bool has(Split s) const;
  double length(Split s) const;  // 0 when the split is absent
  double norm() const;           // distance to the star tree

  Topology topology() const { return Topology(splits_, n_taxa()); }
  bool same_topology(const Tree& other) const;

  bool operator==(const Tree& other) const;

 private:
  TaxonSetPtr taxa_;
  std::vector<Split> splits_;   // sorted by mask
  std::vector<double> lengths_; // parallel to splits_
};

// Number of possible interior splits of a taxon set of size n.
uint64_t count_splits(int n);

// Number of fully resolved topologies: (2n-5)!!.
uint64_t count_topologies(int n);

double tree_norm(const Tree& x);

}  // namespace bhv

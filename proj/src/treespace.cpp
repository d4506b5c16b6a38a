#include "bhv/treespace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace bhv {

TaxonSet::TaxonSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 4) {
    throw std::invalid_argument("TaxonSet: need at least 4 taxa");
  }
  if (labels_.size() > 62) {
    throw std::invalid_argument("TaxonSet: at most 62 taxa supported");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw std::invalid_argument("TaxonSet: empty label");
    if (!seen.insert(l).second) {
      throw std::invalid_argument("TaxonSet: duplicate label '" + l + "'");
    }
  }
}

std::optional<int> TaxonSet::index_of(const std::string& label) const {
  for (int i = 0; i < size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

TaxonSetPtr numeric_taxa(int n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return std::make_shared<TaxonSet>(std::move(labels));
}

Split::Split(uint64_t side, const TaxonSet& taxa) {
  uint64_t full = taxa.full_mask();
  if ((side & ~full) != 0) {
    throw std::invalid_argument("Split: side mask outside taxon set");
  }
  if (side & 1) side = full & ~side;  // store the side without taxon 0
  side_ = side;
  int k = std::popcount(side_);
  if (k < 2 || k > taxa.size() - 2) {
    throw std::invalid_argument("Split: side size outside [2, N-2]");
  }
}

int Split::side_size() const { return std::popcount(side_); }

bool splits_compatible(Split a, Split b) {
  uint64_t x = a.mask(), y = b.mask();
  return (x & y) == 0 || (x & ~y) == 0 || (y & ~x) == 0;
}

bool all_compatible(std::span<const Split> splits) {
  for (size_t i = 0; i < splits.size(); ++i) {
    for (size_t j = i + 1; j < splits.size(); ++j) {
      if (!splits_compatible(splits[i], splits[j])) return false;
    }
  }
  return true;
}

Topology::Topology(std::vector<Split> splits, int n_taxa)
    : splits_(std::move(splits)), n_taxa_(n_taxa) {
  std::sort(splits_.begin(), splits_.end());
  splits_.erase(std::unique(splits_.begin(), splits_.end()), splits_.end());
  if (!all_compatible(splits_)) {
    throw std::invalid_argument("Topology: incompatible splits");
  }
  if (codimension() < 0) {
    throw std::invalid_argument("Topology: too many splits");
  }
}

bool Topology::contains(Split s) const {
  return std::binary_search(splits_.begin(), splits_.end(), s);
}

uint64_t Topology::hash() const {
  // FNV-1a over the sorted masks; stable by construction.
  uint64_t h = 0xcbf29ce484222325ull;
  for (const Split& s : splits_) {
    uint64_t m = s.mask();
    for (int b = 0; b < 8; ++b) {
      h ^= (m >> (8 * b)) & 0xff;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

Tree::Tree(TaxonSetPtr taxa, std::vector<std::pair<Split, double>> edges)
    : taxa_(std::move(taxa)) {
  if (!taxa_) throw std::invalid_argument("Tree: null taxon set");
  std::sort(edges.begin(), edges.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  splits_.reserve(edges.size());
  lengths_.reserve(edges.size());
  for (const auto& [s, len] : edges) {
    if (!(len > 0.0)) {
      throw std::invalid_argument("Tree: non-positive split length");
    }
    if (!splits_.empty() && splits_.back() == s) {
      throw std::invalid_argument("Tree: duplicate split");
    }
    splits_.push_back(s);
    lengths_.push_back(len);
  }
  if (static_cast<int>(splits_.size()) > n_taxa() - 3) {
    throw std::invalid_argument("Tree: too many splits");
  }
  if (!all_compatible(splits_)) {
    throw std::invalid_argument("Tree: incompatible splits");
  }
}

bool Tree::has(Split s) const {
  return std::binary_search(splits_.begin(), splits_.end(), s);
}

double Tree::length(Split s) const {
  auto it = std::lower_bound(splits_.begin(), splits_.end(), s);
  if (it == splits_.end() || *it != s) return 0.0;
  return lengths_[it - splits_.begin()];
}

double Tree::norm() const {
  double s2 = 0.0;
  for (double l : lengths_) s2 += l * l;
  return std::sqrt(s2);
}

bool Tree::same_topology(const Tree& other) const {
  return splits_ == other.splits_;
}

bool Tree::operator==(const Tree& other) const {
  return *taxa_ == *other.taxa_ && splits_ == other.splits_ &&
         lengths_ == other.lengths_;
}

uint64_t count_splits(int n) {
  if (n < 4) throw std::invalid_argument("count_splits: n < 4");
  if (n > 62) throw std::invalid_argument("count_splits: n too large");
  return (uint64_t{1} << (n - 1)) - static_cast<uint64_t>(n + 1);
}

uint64_t count_topologies(int n) {
  if (n < 4) throw std::invalid_argument("count_topologies: n < 4");
  uint64_t r = 1;
  for (int k = 3; 2 * k - 5 <= 2 * n - 5; ++k) {
    uint64_t f = static_cast<uint64_t>(2 * k - 5);
    if (r > UINT64_MAX / f) {
      throw std::overflow_error("count_topologies: overflow");
    }
    r *= f;
  }
  return r;
}

double tree_norm(const Tree& x) { return x.norm(); }

}  // namespace bhv

#pragma once

#include <string>
#include <string_view>

#include "bhv/treespace.hpp"

namespace bhv {

struct NewickError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses an unrooted Newick tree. Interior branch lengths must be
// present and non-negative; lengths below kLengthEps are contracted.
// Pendant branch lengths are accepted and discarded. A binary root is
// collapsed (the two root edges describe the same split; their lengths
// add).
Tree parse_newick(std::string_view text, TaxonSetPtr taxa);

// Serializes with full-precision interior lengths; pendant edges are
// written with a nominal length of 0.1.
std::string to_newick(const Tree& tree);

// Taxon labels in order of first appearance, for when no taxon-map file
// is given.
TaxonSetPtr taxa_from_newick(std::string_view text);

}  // namespace bhv

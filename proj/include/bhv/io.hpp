#pragma once

#include <string>
#include <vector>

#include "bhv/newick.hpp"
#include "bhv/treespace.hpp"

namespace bhv {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Taxon-map file: one label per line, line number = canonical index.
TaxonSetPtr read_taxa_file(const std::string& path);

// One Newick tree per line; blank lines and '#' comments are skipped.
// Parse errors are reported with their line number.
std::vector<Tree> load_dataset(const std::string& path, TaxonSetPtr taxa);

struct DatasetSummary {
  long n = 0;
  long distinct_splits = 0;
  long distinct_topologies = 0;
  long modal_topology_count = 0;
  std::string modal_topology_newick;
};

DatasetSummary summarize_dataset(std::span<const Tree> data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string topology_hex(uint64_t hash);
std::string format_double(double v);  // deterministic full-precision text

}  // namespace bhv

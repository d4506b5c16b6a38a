#include "bhv/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bhv {

TaxonSetPtr read_taxa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxa file: " + path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    labels.push_back(line);
  }
  return std::make_shared<TaxonSet>(std::move(labels));
}

std::vector<Tree> load_dataset(const std::string& path, TaxonSetPtr taxa) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::vector<Tree> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_newick(line, taxa));
    } catch (const std::exception& e) {
      throw NewickError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError("dataset is empty: " + path);
  return out;
}

DatasetSummary summarize_dataset(std::span<const Tree> data) {
  DatasetSummary s;
  s.n = static_cast<long>(data.size());
  std::set<uint64_t> splits;
  std::map<uint64_t, long> topologies;
  std::map<uint64_t, const Tree*> examples;
  for (const Tree& t : data) {
    for (Split sp : t.splits()) splits.insert(sp.mask());
    uint64_t h = t.topology().hash();
    ++topologies[h];
    examples.emplace(h, &t);
  }
  s.distinct_splits = static_cast<long>(splits.size());
  s.distinct_topologies = static_cast<long>(topologies.size());
  for (auto& [h, count] : topologies) {
    if (count > s.modal_topology_count) {
      s.modal_topology_count = count;
      s.modal_topology_newick = to_newick(*examples[h]);
    }
  }
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
}

std::string topology_hex(uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bhv

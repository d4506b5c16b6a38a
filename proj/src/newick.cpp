#include "bhv/newick.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

#include "bhv/tree_graph.hpp"

namespace bhv {

namespace {

struct Parser {
  std::string_view text;
  size_t pos = 0;
  const TaxonSet* taxa = nullptr;  // null when only collecting labels
  std::vector<std::string>* found_labels = nullptr;
  uint64_t seen = 0;
  std::vector<std::pair<uint64_t, double>> interior;  // cluster, length

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    if (pos >= text.size()) throw NewickError("newick: unexpected end of input");
    return text[pos];
  }

  void expect(char c) {
    if (peek() != c) {
      throw NewickError(std::string("newick: expected '") + c + "' at position " +
                        std::to_string(pos));
    }
    ++pos;
  }

  std::string label() {
    skip_ws();
    std::string out;
    if (pos < text.size() && text[pos] == '\'') {
      ++pos;
      while (pos < text.size()) {
        if (text[pos] == '\'') {
          if (pos + 1 < text.size() && text[pos + 1] == '\'') {
            out += '\'';
            pos += 2;
            continue;
          }
          ++pos;
          return out;
        }
        out += text[pos++];
      }
      throw NewickError("newick: unterminated quoted label");
    }
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c))) {
        break;
      }
      out += c;
      ++pos;
    }
    return out;
  }

  std::optional<double> branch_length() {
    skip_ws();
    if (pos >= text.size() || text[pos] != ':') return std::nullopt;
    ++pos;
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
            text[pos] == '-' || text[pos] == '+' || text[pos] == 'e' || text[pos] == 'E')) {
      ++pos;
    }
    double v = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, v);
    if (res.ec != std::errc() || res.ptr != text.data() + pos || pos == start) {
      throw NewickError("newick: bad branch length at position " + std::to_string(start));
    }
    return v;
  }

  struct Sub {
    uint64_t mask = 0;
    bool is_leaf = false;
    std::optional<double> len;
  };

  Sub subtree() {
    Sub out;
    if (peek() == '(') {
      ++pos;
      std::vector<Sub> children;
      children.push_back(subtree());
      while (peek() == ',') {
        ++pos;
        children.push_back(subtree());
      }
      expect(')');
      if (children.size() < 2) throw NewickError("newick: vertex of degree 2");
      for (const Sub& c : children) {
        out.mask |= c.mask;
        record_edge(c);
      }
      label();  // internal labels are allowed and ignored
      out.len = branch_length();
      return out;
    }
    std::string name = label();
    if (name.empty()) throw NewickError("newick: missing taxon label");
    out.is_leaf = true;
    out.len = branch_length();
    int idx;
    if (taxa) {
      auto i = taxa->index_of(name);
      if (!i) throw NewickError("newick: unknown taxon '" + name + "'");
      idx = *i;
    } else {
      idx = -1;
      for (size_t i = 0; i < found_labels->size(); ++i) {
        if ((*found_labels)[i] == name) {
          idx = static_cast<int>(i);
          break;
        }
      }
      if (idx < 0) {
        idx = static_cast<int>(found_labels->size());
        found_labels->push_back(name);
      }
      if (idx >= 62) throw NewickError("newick: too many taxa");
    }
    uint64_t bit = uint64_t{1} << idx;
    if (seen & bit) throw NewickError("newick: duplicate taxon '" + name + "'");
    seen |= bit;
    out.mask = bit;
    return out;
  }

  void record_edge(const Sub& child) {
    if (child.is_leaf) return;  // pendant length discarded
    if (!child.len) throw NewickError("newick: interior branch without length");
    if (*child.len < 0) throw NewickError("newick: negative interior branch length");
    interior.push_back({child.mask, *child.len});
  }

  void parse_tree() {
    if (peek() != '(') throw NewickError("newick: tree must start with '('");
    ++pos;
    std::vector<Sub> children;
    children.push_back(subtree());
    while (peek() == ',') {
      ++pos;
      children.push_back(subtree());
    }
    expect(')');
    label();
    branch_length();  // root length, ignored
    skip_ws();
    if (pos < text.size() && text[pos] == ';') ++pos;
    skip_ws();
    if (pos != text.size()) throw NewickError("newick: trailing characters");

    if (children.size() < 2) throw NewickError("newick: vertex of degree 2");
    if (children.size() == 2) {
      // Rooted-binary form: the two root edges are one unrooted edge.
      const Sub& a = children[0];
      const Sub& b = children[1];
      if (!a.is_leaf && !b.is_leaf) {
        double total = a.len.value_or(0.0) + b.len.value_or(0.0);
        if (!a.len && !b.len) throw NewickError("newick: interior branch without length");
        if (total < 0) throw NewickError("newick: negative interior branch length");
        interior.push_back({a.mask, total});
      }
      // Leaf-adjacent root edges are pendant; nothing to record.
    } else {
      for (const Sub& c : children) record_edge(c);
    }
  }
};

}  // namespace

Tree parse_newick(std::string_view text, TaxonSetPtr taxa) {
  Parser p;
  p.text = text;
  p.taxa = taxa.get();
  p.parse_tree();
  if (p.seen != taxa->full_mask()) {
    throw NewickError("newick: tree does not cover the taxon set");
  }
  std::vector<std::pair<Split, double>> edges;
  int n = taxa->size();
  for (auto [mask, len] : p.interior) {
    if (len < kLengthEps) continue;  // contracted
    int k = std::popcount(mask);
    if (k < 2 || k > n - 2) continue;  // pendant-equivalent cluster
    edges.push_back({Split(mask, *taxa), len});
  }
  return Tree(std::move(taxa), std::move(edges));
}

TaxonSetPtr taxa_from_newick(std::string_view text) {
  Parser p;
  p.text = text;
  std::vector<std::string> labels;
  p.found_labels = &labels;
  p.parse_tree();
  return std::make_shared<TaxonSet>(std::move(labels));
}

namespace {

void write_node(const TreeGraph& g, int v, const TaxonSet& taxa, std::string& out) {
  const TreeGraph::Node& node = g.nodes[v];
  if (node.leaf >= 0) {
    out += taxa.label(node.leaf);
    out += ":0.1";
    return;
  }
  std::vector<int> kids = node.children;
  std::sort(kids.begin(), kids.end(), [&](int a, int b) {
    return std::countr_zero(g.nodes[a].mask) < std::countr_zero(g.nodes[b].mask);
  });
  out += '(';
  for (size_t i = 0; i < kids.size(); ++i) {
    if (i) out += ',';
    write_node(g, kids[i], taxa, out);
  }
  out += ')';
  if (node.parent >= 0) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ":%.17g", node.parent_len);
    out += buf;
  }
}

}  // namespace

std::string to_newick(const Tree& tree) {
  TreeGraph g = build_tree_graph(tree);
  std::string out;
  write_node(g, 0, *tree.taxa(), out);
  out += ';';
  return out;
}

}  // namespace bhv

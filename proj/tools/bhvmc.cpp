// bhvmc: Brownian-motion kernels, bridges, and Bayesian inference on
// BHV tree space.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>

#include "bhv/evidence.hpp"
#include "bhv/io.hpp"
#include "bhv/posterior.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace bhv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;
constexpr int kExitEstimator = 5;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat typed key=value configuration with a fixed key set. Every run
// writes back the fully resolved snapshot so results are reproducible
// from the output directory alone.
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto notspace = [](unsigned char c) { return !std::isspace(c); };
      auto b = std::find_if(line.begin(), line.end(), notspace);
      auto e = std::find_if(line.rbegin(), line.rend(), notspace).base();
      if (b >= e) continue;
      std::string entry(b, e);
      size_t eq = entry.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected key = value");
      }
      std::string key = entry.substr(0, eq);
      std::string value = entry.substr(eq + 1);
      while (!key.empty() && std::isspace((unsigned char)key.back())) key.pop_back();
      while (!value.empty() && std::isspace((unsigned char)value.front())) {
        value.erase(value.begin());
      }
      values_[key] = value;
    }
  }
  void check_keys(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      (void)v;
      if (!known.count(k)) throw ConfigError("unknown config key: " + k);
    }
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& dflt = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }
  long integer(const std::string& key, long dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw ConfigError("bad integer for " + key);
    return v;
  }
  double real(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw ConfigError("bad real for " + key);
    return v;
  }
  bool boolean(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("bad boolean for " + key);
  }
  std::string snapshot() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;  // ordered for the snapshot
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BHVMC_OUT")) return env;
  return ".";
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& content) {
  fs::create_directories(dir);
  write_text_file((fs::path(dir) / name).string(), content);
}

TaxonSetPtr resolve_taxa(const std::string& taxa_path,
                         const std::string& first_newick) {
  if (!taxa_path.empty()) return read_taxa_file(taxa_path);
  return taxa_from_newick(first_newick);
}

TaxonSetPtr taxa_for_dataset(const std::string& taxa_path,
                             const std::string& data_path) {
  if (!taxa_path.empty()) return read_taxa_file(taxa_path);
  std::ifstream in(data_path);
  if (!in) throw IoError("cannot open dataset: " + data_path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return taxa_from_newick(line);
  }
  throw IoError("dataset is empty: " + data_path);
}

std::string newick_arg(const std::string& arg) {
  // Accept an inline Newick string or @path to a file holding one.
  if (!arg.empty() && arg[0] == '@') {
    std::string text = read_text_file(arg.substr(1));
    size_t end = text.find(';');
    if (end == std::string::npos) throw IoError("no tree in " + arg.substr(1));
    return text.substr(0, end + 1);
  }
  return arg;
}

json summary_json(const DatasetSummary& s) {
  json j;
  j["n"] = s.n;
  j["distinct_splits"] = s.distinct_splits;
  j["distinct_topologies"] = s.distinct_topologies;
  j["modal_topology_count"] = s.modal_topology_count;
  j["modal_topology"] = s.modal_topology_newick;
  return j;
}

int cmd_geodesic(const RunConfig& cfg) {
  std::string t1 = newick_arg(cfg.str("tree1"));
  std::string t2 = newick_arg(cfg.str("tree2"));
  if (t1.empty() || t2.empty()) throw ConfigError("tree1 and tree2 required");
  TaxonSetPtr taxa = resolve_taxa(cfg.str("taxa"), t1);
  Tree x1 = parse_newick(t1, taxa);
  Tree x2 = parse_newick(t2, taxa);
  Geodesic g = geodesic(x1, x2);
  GeodesicClassification cls = classify(g);

  json j;
  j["distance"] = g.length();
  j["simple"] = cls.is_simple;
  j["cone_path"] = cls.is_cone_path;
  j["nu"] = cls.nu;
  j["crossings"] = json::array();
  for (const Crossing& c : cls.crossings) {
    j["crossings"].push_back({{"t", c.t}, {"codim", c.codim}});
  }
  long samples = cfg.integer("samples", 0);
  if (samples > 0) {
    j["points"] = json::array();
    for (long i = 0; i <= samples; ++i) {
      double t = static_cast<double>(i) / samples;
      j["points"].push_back(to_newick(g.at(t)));
    }
  }
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "geodesic.json", j.dump(1) + "\n");
  write_output(dir, "geodesic_config.txt", cfg.snapshot());
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_frechet(const RunConfig& cfg) {
  std::string data_path = cfg.str("data");
  if (data_path.empty()) throw ConfigError("data required");
  TaxonSetPtr taxa = taxa_for_dataset(cfg.str("taxa"), data_path);
  std::vector<Tree> data = load_dataset(data_path, taxa);
  long iterations = cfg.integer("iterations", 100000);
  RngStream rng(cfg.integer("seed", 1));
  auto [mean, variance] = frechet_mean(data, iterations, rng);

  json j;
  j["mean"] = to_newick(mean);
  j["variance"] = variance;
  j["iterations"] = iterations;
  j["dataset"] = summary_json(summarize_dataset(data));
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "frechet.json", j.dump(1) + "\n");
  write_output(dir, "frechet_config.txt", cfg.snapshot());
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_simulate_walk(const RunConfig& cfg) {
  std::string x0_text = newick_arg(cfg.str("x0"));
  if (x0_text.empty()) throw ConfigError("x0 required");
  TaxonSetPtr taxa = resolve_taxa(cfg.str("taxa"), x0_text);
  Tree x0 = parse_newick(x0_text, taxa);
  double t0 = cfg.real("t0", 0.1);
  int m = static_cast<int>(cfg.integer("m", 100));
  long walks = cfg.integer("walks", 100);
  RngStream rng(cfg.integer("seed", 1));

  std::string endpoints;
  std::string csv = "walk,step,topology,distance_to_source\n";
  std::set<uint64_t> topologies;
  for (long w = 0; w < walks; ++w) {
    RngStream ws = rng.substream(w);
    WalkResult r = random_walk({x0, t0, m}, ws);
    endpoints += to_newick(r.endpoint) + "\n";
    topologies.insert(r.endpoint.topology().hash());
    for (int j = 0; j <= m; ++j) {
      csv += std::to_string(w) + "," + std::to_string(j) + "," +
             topology_hex(r.path[j].topology().hash()) + "," +
             format_double(bhv_distance(r.path[j], x0)) + "\n";
    }
  }
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "walk_endpoints.nwk", endpoints);
  write_output(dir, "walk_steps.csv", csv);
  write_output(dir, "simulate_walk_config.txt", cfg.snapshot());
  json j;
  j["walks"] = walks;
  j["distinct_endpoint_topologies"] = topologies.size();
  write_output(dir, "simulate_walk.json", j.dump(1) + "\n");
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_sample_bridge(const RunConfig& cfg) {
  std::string x0_text = newick_arg(cfg.str("x0"));
  std::string xs_text = newick_arg(cfg.str("xstar"));
  if (x0_text.empty() || xs_text.empty()) {
    throw ConfigError("x0 and xstar required");
  }
  TaxonSetPtr taxa = resolve_taxa(cfg.str("taxa"), x0_text);
  Tree x0 = parse_newick(x0_text, taxa);
  Tree xs = parse_newick(xs_text, taxa);
  double t0 = cfg.real("t0", 0.1);
  int m = static_cast<int>(cfg.integer("m", 50));
  long iters = cfg.integer("iters", 10000);
  long burnin = cfg.integer("burnin", 1000);
  long thin = cfg.integer("thin", 100);
  ProposalTuning tuning;
  tuning.alpha_b = cfg.real("alpha_b", 0.2);
  tuning.use_penalty = cfg.boolean("penalty", true);

  RngStream rng(cfg.integer("seed", 1));
  BridgeChain chain(x0, xs, t0, m, tuning);
  chain.initialize(rng, cfg.integer("init_cap", 100000));

  std::string csv = "iter,accepted,log_target\n";
  std::string dumps;
  for (long i = 1; i <= burnin + iters; ++i) {
    bool accepted = chain.step(rng);
    if (i <= burnin) continue;
    csv += std::to_string(i - burnin) + "," + (accepted ? "1" : "0") + "," +
           format_double(chain.log_f()) + "\n";
    if ((i - burnin) % thin == 0) {
      for (const Tree& p : chain.state().points) dumps += to_newick(p) + "\n";
      dumps += "\n";
    }
  }
  const BridgeCounters& c = chain.counters();
  json j;
  j["acceptance_rate"] =
      static_cast<double>(c.accepts) / std::max<uint64_t>(1, c.proposals);
  j["step4_rejects"] = c.step4_rejects;
  j["init_attempts"] = c.init_attempts;
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "bridge_iters.csv", csv);
  write_output(dir, "bridges.txt", dumps);
  write_output(dir, "sample_bridge.json", j.dump(1) + "\n");
  write_output(dir, "sample_bridge_config.txt", cfg.snapshot());
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_infer(const RunConfig& cfg) {
  std::string data_path = cfg.str("data_path");
  if (data_path.empty()) throw ConfigError("data_path required");
  TaxonSetPtr taxa = taxa_for_dataset(cfg.str("taxa_path"), data_path);
  std::vector<Tree> data = load_dataset(data_path, taxa);
  DatasetSummary summary = summarize_dataset(data);

  InferenceConfig config;
  config.m = static_cast<int>(cfg.integer("m", 50));
  config.iters = cfg.integer("iters", 10000);
  config.burnin = cfg.integer("burnin", 1000);
  config.thin = static_cast<int>(cfg.integer("thin", 10));
  config.alpha_b = cfg.real("alpha_b", 0.2);
  config.alpha_0 = cfg.real("alpha_0", 0.9);
  config.lambda0 = cfg.real("lambda0", 0.002);
  config.sigma0 = cfg.real("sigma0", 0.1);
  config.seed = cfg.integer("seed", 1);
  config.frechet_iters = cfg.integer("frechet_iters", 200);
  config.init_cap = cfg.integer("init_cap", 100000);
  config.threads = static_cast<int>(cfg.integer("threads", 1));
  config.use_penalty = cfg.boolean("penalty", true);
  config.fix_x0 = cfg.boolean("fix_x0", false);
  if (cfg.has("x0_path")) {
    config.x0_init = parse_newick(newick_arg("@" + cfg.str("x0_path")), taxa);
  }
  if (cfg.has("t0_init")) config.t0_init = cfg.real("t0_init", 0.0);

  Prior prior{taxa->size()};
  RngStream rng(config.seed);
  PosteriorTrace trace = run_inference(data, prior, config, rng);

  std::string csv = "iter,t0,log_joint,x0_topology\n";
  for (const TraceRow& r : trace.rows) {
    csv += std::to_string(r.iter) + "," + format_double(r.t0) + "," +
           format_double(r.log_joint) + "," + topology_hex(r.x0_topology) +
           "\n";
  }
  std::string samples;
  for (const Tree& x : trace.x0_samples) samples += to_newick(x) + "\n";

  json j;
  j["dataset"] = summary_json(summary);
  j["init_t0"] = trace.init_t0;
  const SweepCounters& c = trace.counters;
  auto rate = [](uint64_t a, uint64_t p) {
    return p == 0 ? 0.0 : static_cast<double>(a) / p;
  };
  j["acceptance"] = {
      {"bridge", rate(c.bridge_accepts, c.bridge_proposals)},
      {"x0", rate(c.x0_accepts, c.x0_proposals)},
      {"t0", rate(c.t0_accepts, c.t0_proposals)},
  };
  j["step4_rejects"] = c.step4_rejects;
  j["t0_guard_hits"] = c.t0_guard_hits;
  json topo = json::array();
  for (auto& [hash, count] : trace.topology_counts) {
    topo.push_back({{"topology", topology_hex(hash)},
                    {"count", count},
                    {"proportion",
                     static_cast<double>(count) /
                         std::max<size_t>(1, trace.x0_samples.size())},
                    {"newick", trace.topology_examples.at(hash)}});
  }
  j["x0_topologies"] = topo;
  if (!trace.rows.empty()) {
    std::vector<double> t0s;
    for (const TraceRow& r : trace.rows) t0s.push_back(r.t0);
    std::sort(t0s.begin(), t0s.end());
    double mean = 0;
    for (double v : t0s) mean += v;
    j["t0_posterior"] = {
        {"mean", mean / t0s.size()},
        {"median", t0s[t0s.size() / 2]},
        {"q025", t0s[static_cast<size_t>(0.025 * t0s.size())]},
        {"q975", t0s[static_cast<size_t>(0.975 * t0s.size())]},
    };
    long best = 0;
    uint64_t best_hash = 0;
    for (auto& [hash, count] : trace.topology_counts) {
      if (count > best) {
        best = count;
        best_hash = hash;
      }
    }
    j["x0_modal_topology"] = trace.topology_examples.at(best_hash);
  }

  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "trace.csv", csv);
  write_output(dir, "x0_samples.nwk", samples);
  write_output(dir, "summary.json", j.dump(1) + "\n");
  write_output(dir, "infer_config.txt", cfg.snapshot());
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_marginal(const RunConfig& cfg) {
  std::string data_path = cfg.str("data");
  if (data_path.empty()) throw ConfigError("data required");
  TaxonSetPtr taxa = taxa_for_dataset(cfg.str("taxa"), data_path);
  std::vector<Tree> data = load_dataset(data_path, taxa);
  std::string method = cfg.str("method", "chib");
  double t0 = cfg.real("t0", 0.1);
  int m = static_cast<int>(cfg.integer("m", 50));

  EvidenceConfig config;
  config.m1 = static_cast<int>(cfg.integer("m1", 2000));
  config.m2 = static_cast<int>(cfg.integer("m2", 2000));
  config.h = static_cast<int>(cfg.integer("h_points", 25));
  config.k_rungs = static_cast<int>(cfg.integer("k", 100));
  config.burnin = cfg.integer("burnin", 500);
  config.thin = static_cast<int>(cfg.integer("thin", 1));
  config.alpha_b = cfg.real("alpha_b", 0.2);
  config.use_penalty = cfg.boolean("penalty", true);
  config.init_cap = cfg.integer("init_cap", 100000);
  config.bootstrap = static_cast<int>(cfg.integer("bootstrap", 200));
  config.threads = static_cast<int>(cfg.integer("threads", 1));

  long repeats = cfg.integer("repeats", 1);
  uint64_t seed = cfg.integer("seed", 1);

  Tree x0 = [&]() {
    if (method == "star-exact") return Tree(taxa, {});
    std::string x0_text = newick_arg(cfg.str("x0"));
    if (x0_text.empty()) throw ConfigError("x0 required");
    return parse_newick(x0_text, taxa);
  }();

  auto run_once = [&](RngStream rng) -> MlEstimate {
    if (method == "chib") return chib_log_ml(data, x0, t0, m, config, rng);
    if (method == "tunnel") return tunnel_log_ml(data, x0, t0, m, config, rng);
    if (method == "stepping-stone") {
      return stepping_stone_log_ml(data, x0, t0, m, config, rng);
    }
    if (method == "star-exact") return star_exact_log_ml(data, t0);
    throw ConfigError("unknown method: " + method);
  };

  json j;
  j["method"] = method;
  j["t0"] = t0;
  j["m"] = m;
  if (repeats <= 1) {
    MlEstimate est = run_once(RngStream(seed));
    j["log_ml"] = est.log_ml;
    j["bootstrap_se"] = est.se;
    j["per_datum"] = est.per_datum;
  } else {
    std::vector<double> totals;
    RngStream root(seed);
    for (long r = 0; r < repeats; ++r) {
      totals.push_back(run_once(root.substream(r)).log_ml);
    }
    std::sort(totals.begin(), totals.end());
    j["repeats"] = repeats;
    j["log_ml"] = totals[totals.size() / 2];
    j["estimates"] = totals;
  }
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "marginal.json", j.dump(1) + "\n");
  write_output(dir, "marginal_config.txt", cfg.snapshot());
  printf("%s\n", j.dump().c_str());
  return kExitOk;
}

int cmd_exact4(const RunConfig& cfg) {
  double a = cfg.real("a", 0.5);
  double t0 = cfg.real("t0", 0.25);
  long points = cfg.integer("points", 200);
  double bmax = cfg.real("bmax", a + 6 * std::sqrt(t0));
  std::string csv = "axis,b,density\n";
  for (int axis = 0; axis < 3; ++axis) {
    for (long i = 0; i <= points; ++i) {
      double b = bmax * static_cast<double>(i) / points;
      csv += std::to_string(axis) + "," + format_double(b) + "," +
             format_double(spider4_axis_density(axis, b, 0, a, t0)) + "\n";
    }
  }
  std::string dir = output_dir(cfg.str("out"));
  write_output(dir, "exact4.csv", csv);
  write_output(dir, "exact4_config.txt", cfg.snapshot());
  printf("{\"rows\": %ld}\n", 3 * (points + 1));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bhvmc: Brownian-motion kernels, bridge sampling, and Bayesian\n"
      "inference of source and dispersion on BHV tree space."};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 2 config error, 3 I/O error, 4 Newick parse error,\n"
      "5 estimator failure, 1 internal error.\n"
      "Default output directory: --out, else $BHVMC_OUT, else '.'.");

  std::map<std::string, std::string> flags;
  std::string infer_config_path;
  auto add_flags = [&](CLI::App* sub, std::vector<std::string> keys) {
    for (const std::string& key : keys) {
      sub->add_option_function<std::string>(
          "--" + key, [&flags, key](const std::string& v) { flags[key] = v; });
    }
  };

  CLI::App* geo = app.add_subcommand("geodesic", "distance and classification");
  add_flags(geo, {"tree1", "tree2", "taxa", "samples", "out"});
  CLI::App* fre = app.add_subcommand("frechet", "Sturm mean and variance");
  add_flags(fre, {"data", "taxa", "iterations", "seed", "out"});
  CLI::App* sim = app.add_subcommand("simulate-walk", "forward random walks");
  add_flags(sim, {"x0", "taxa", "t0", "m", "walks", "seed", "out"});
  CLI::App* bri = app.add_subcommand("sample-bridge", "conditioned-path MCMC");
  add_flags(bri, {"x0", "xstar", "taxa", "t0", "m", "iters", "burnin", "thin",
                  "alpha_b", "penalty", "init_cap", "seed", "out"});
  CLI::App* inf = app.add_subcommand("infer", "posterior for (x0, t0)");
  inf->add_option("--config", infer_config_path, "key = value config file");
  add_flags(inf, {"data_path", "taxa_path", "m", "iters", "burnin", "thin",
                  "alpha_b", "alpha_0", "lambda0", "sigma0", "seed",
                  "frechet_iters", "init_cap", "threads", "penalty", "fix_x0",
                  "x0_path", "t0_init", "out"});
  CLI::App* mar = app.add_subcommand("marginal", "marginal likelihood");
  add_flags(mar, {"method", "data", "taxa", "x0", "t0", "m", "m1", "m2",
                  "h_points", "k", "burnin", "thin", "alpha_b", "penalty",
                  "init_cap", "bootstrap", "threads", "repeats", "seed",
                  "out"});
  CLI::App* exa = app.add_subcommand("exact4", "exact N=4 kernel curves");
  add_flags(exa, {"a", "t0", "points", "bmax", "out"});

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (inf->parsed() && !infer_config_path.empty()) {
      cfg.load_file(infer_config_path);
    }
    for (auto& [k, v] : flags) cfg.set(k, v);

    if (geo->parsed()) {
      cfg.check_keys({"tree1", "tree2", "taxa", "samples", "out"});
      return cmd_geodesic(cfg);
    }
    if (fre->parsed()) {
      cfg.check_keys({"data", "taxa", "iterations", "seed", "out"});
      return cmd_frechet(cfg);
    }
    if (sim->parsed()) {
      cfg.check_keys({"x0", "taxa", "t0", "m", "walks", "seed", "out"});
      return cmd_simulate_walk(cfg);
    }
    if (bri->parsed()) {
      cfg.check_keys({"x0", "xstar", "taxa", "t0", "m", "iters", "burnin",
                      "thin", "alpha_b", "penalty", "init_cap", "seed", "out"});
      return cmd_sample_bridge(cfg);
    }
    if (inf->parsed()) {
      cfg.check_keys({"data_path", "taxa_path", "m", "iters", "burnin", "thin",
                      "alpha_b", "alpha_0", "lambda0", "sigma0", "seed",
                      "frechet_iters", "init_cap", "threads", "penalty",
                      "fix_x0", "x0_path", "t0_init", "out"});
      return cmd_infer(cfg);
    }
    if (mar->parsed()) {
      cfg.check_keys({"method", "data", "taxa", "x0", "t0", "m", "m1", "m2",
                      "h_points", "k", "burnin", "thin", "alpha_b", "penalty",
                      "init_cap", "bootstrap", "threads", "repeats", "seed",
                      "out"});
      return cmd_marginal(cfg);
    }
    if (exa->parsed()) {
      cfg.check_keys({"a", "t0", "points", "bmax", "out"});
      return cmd_exact4(cfg);
    }
  } catch (const ConfigError& e) {
    fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NewickError& e) {
    fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const IoError& e) {
    fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const EstimatorError& e) {
    fprintf(stderr, "estimator failure: %s\n", e.what());
    return kExitEstimator;
  } catch (const BridgeInitError& e) {
    fprintf(stderr, "estimator failure: %s\n", e.what());
    return kExitEstimator;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}

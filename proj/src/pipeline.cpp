#include "densitree/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "densitree/error.hpp"
#include "densitree/io.hpp"

namespace densitree {

using ordered_json = nlohmann::ordered_json;

GraphType auto_graph_type(std::size_t d) {
  if (d == 1) return GraphType::Unidimensional;
  if (d <= 3) return GraphType::Delaunay;
  return GraphType::Pairs;
}

RunConfig resolve(const RunConfig& cfg, std::size_t d) {
  RunConfig out = cfg;
  if (!out.graphtype) out.graphtype = auto_graph_type(d);
  if (!out.hmult) out.hmult = d <= 6 ? 0.75 : 1.0;
  if (!(out.lambda > 0.0 && out.lambda < 1.0)) throw InputError("lambda must lie in (0, 1)");
  if (!(*out.hmult > 0.0) || !std::isfinite(*out.hmult)) throw InputError("hmult must be positive");
  if (out.n_grid < 2) throw InputError("n_grid must be at least 2");
  if (out.grid_pairs < 2) throw InputError("grid_pairs must be at least 2");
  if (out.n_stage < 0) throw InputError("n_stage must be non-negative");
  if (*out.graphtype == GraphType::Unidimensional && d != 1) {
    throw InputError("the unidimensional graph needs one column");
  }
  if (*out.graphtype == GraphType::Delaunay && (d < 2 || d > 3)) {
    throw InputError("the Delaunay graph supports 2 or 3 columns; use --graphtype pairs");
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Delaunay runs on coordinates divided by their standard deviations, so the
// graph does not depend on the units of each column.
Matrix standardized(const Matrix& data) {
  const auto sd = column_sd(data);
  Matrix out = data;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) /= sd[j];
  }
  return out;
}

// Classification and diagnostics; shared by fresh and rethresholded runs.
void finish(RunArtifact& run) {
  const RunConfig& cfg = run.config;
  run.scan = scan(*run.graph, run.densities, cfg.n_grid);
  ClassifyConfig cc;
  cc.n_stage = cfg.n_stage;
  cc.se = cfg.se;
  cc.hcores = cfg.hcores;
  cc.hmult = *cfg.hmult;
  cc.kernel = cfg.kernel;
  cc.global_h = run.global_h;
  run.classes = classify(run.data, run.scan.cores, cc);
  const bool complete = std::find(run.classes.labels.begin(), run.classes.labels.end(), 0) == run.classes.labels.end();
  if (complete && run.scan.cores.M >= 2) {
    std::vector<double> priors(static_cast<std::size_t>(run.scan.cores.M), 0.0);
    for (int l : run.scan.cores.labels) {
      if (l > 0) priors[static_cast<std::size_t>(l - 1)] += 1.0;
    }
    run.silhouette = dbs(run.data, run.classes.labels, priors, cfg.kernel, *cfg.hmult);
  }
}

}  // namespace

RunArtifact run_cluster(const std::vector<std::string>& names, const Matrix& data, const RunConfig& cfg) {
  if (data.rows() < 2) throw InputError("clustering needs at least two observations");
  RunArtifact run;
  run.config = resolve(cfg, data.cols());
  run.names = names;
  run.data = data;
  run.global_h = h_norm(data);
  for (double& v : run.global_h) v *= *run.config.hmult;
  const Bandwidth bw =
      run.config.adaptive ? Bandwidth::adaptive(hprop2f(data, run.global_h)) : Bandwidth::fixed(run.global_h);
  run.densities = density(data, data, run.config.kernel, bw);

  const auto t0 = std::chrono::steady_clock::now();
  switch (*run.config.graphtype) {
    case GraphType::Unidimensional: run.graph = build_unidimensional(data); break;
    case GraphType::Delaunay: run.graph = build_delaunay(standardized(data)); break;
    case GraphType::Pairs:
      run.graph = build_pairs(data, run.config.kernel, bw, run.config.grid_pairs, run.config.lambda);
      break;
  }
  run.graph_seconds = seconds_since(t0);
  finish(run);
  return run;
}

RunArtifact run_rethreshold(const std::filesystem::path& run_dir, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0, 1)");
  RunArtifact run;
  RunConfig cfg = parse_params_json(read_text(run_dir / "params.json"));
  if (cfg.graphtype != GraphType::Pairs) throw DegenerateError("run directory does not hold a pairs graph");
  const NumericData data = read_numeric_csv(run_dir / "data.csv");
  const NumericData dens = read_numeric_csv(run_dir / "density.csv");
  PairAmplitudes amps = PairAmplitudes::load(run_dir / "amplitudes.bin");
  if (amps.n() != data.values.rows() || dens.values.rows() != data.values.rows() || dens.values.cols() != 2) {
    throw DegenerateError("run directory files disagree on the number of observations");
  }
  if (amps.grid_pairs() != cfg.grid_pairs || amps.kernel() != cfg.kernel) {
    throw DegenerateError("amplitude file does not match params.json");
  }
  cfg.lambda = lambda;
  run.config = resolve(cfg, data.values.cols());
  run.names = data.names;
  run.data = data.values;
  run.global_h = h_norm(run.data);
  for (double& v : run.global_h) v *= *run.config.hmult;
  run.densities = dens.values.column(1);

  const auto t0 = std::chrono::steady_clock::now();
  run.graph.emplace(std::move(amps), lambda);
  run.graph_seconds = seconds_since(t0);
  finish(run);
  return run;
}

// ---------------------------------------------------------------------------
// Serialization

std::string params_json(const RunConfig& cfg) {
  ordered_json j;
  j["data"] = cfg.data_path;
  j["graphtype"] = std::string(to_string(cfg.graphtype.value()));
  j["lambda"] = cfg.lambda;
  j["kernel"] = std::string(to_string(cfg.kernel));
  j["bwtype"] = cfg.adaptive ? "adaptive" : "fixed";
  j["hmult"] = cfg.hmult.value();
  j["n_grid"] = cfg.n_grid;
  j["grid_pairs"] = cfg.grid_pairs;
  j["n_stage"] = cfg.n_stage;
  j["se"] = cfg.se;
  j["hcores"] = cfg.hcores;
  return j.dump(2) + "\n";
}

RunConfig parse_params_json(const std::string& text) {
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("data")) cfg.data_path = j.at("data").get<std::string>();
    if (j.contains("graphtype")) {
      const auto g = j.at("graphtype").get<std::string>();
      if (g != "auto") cfg.graphtype = parse_graph_type(g);
    }
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("kernel")) cfg.kernel = parse_kernel(j.at("kernel").get<std::string>());
    if (j.contains("bwtype")) {
      const auto b = j.at("bwtype").get<std::string>();
      if (b != "fixed" && b != "adaptive") throw InputError("bwtype must be fixed or adaptive");
      cfg.adaptive = b == "adaptive";
    }
    if (j.contains("hmult")) cfg.hmult = j.at("hmult").get<double>();
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<int>();
    if (j.contains("grid_pairs")) cfg.grid_pairs = j.at("grid_pairs").get<int>();
    if (j.contains("n_stage")) cfg.n_stage = j.at("n_stage").get<int>();
    if (j.contains("se")) cfg.se = j.at("se").get<bool>();
    if (j.contains("hcores")) cfg.hcores = j.at("hcores").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad params.json: ") + e.what());
  }
  return cfg;
}

namespace {

std::string short_height(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", h);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

int leaf_count(const ClusterTree& t, int id) {
  const TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
  if (node.children.empty()) return node.label > 0 ? 1 : 0;
  int total = 0;
  for (int c : node.children) total += leaf_count(t, c);
  return total;
}

int min_label(const ClusterTree& t, int id) {
  const TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
  if (node.children.empty()) return node.label;
  int best = 1 << 30;
  for (int c : node.children) best = std::min(best, min_label(t, c));
  return best;
}

void render(const ClusterTree& t, int id, const std::string& prefix, bool last, bool top, std::ostringstream& out) {
  const TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
  out << prefix << (top ? "--" : (last ? "`--" : "|--"));
  if (node.children.empty()) {
    out << "leaf \"" << node.label << "\" (h= " << short_height(node.height) << ", core " << node.core_size
        << ")\n";
    return;
  }
  out << "[node w/ " << node.children.size() << " branches and " << leaf_count(t, id) << " members at h = "
      << short_height(node.height) << "]\n";
  std::vector<int> kids = node.children;
  std::sort(kids.begin(), kids.end(), [&](int a, int b) { return min_label(t, a) < min_label(t, b); });
  const std::string next = prefix + (top ? "  " : (last ? "   " : "|  "));
  for (std::size_t k = 0; k < kids.size(); ++k) render(t, kids[k], next, k + 1 == kids.size(), false, out);
}

}  // namespace

std::string tree_text(const ClusterTree& tree) {
  std::ostringstream out;
  render(tree, tree.root(), "", true, true, out);
  return out.str();
}

std::string tree_json(const ClusterTree& tree) {
  ordered_json j;
  j["root"] = tree.root();
  ordered_json nodes = ordered_json::array();
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const TreeNode& node = tree.nodes[k];
    ordered_json e;
    e["id"] = k;
    e["height"] = node.height;
    e["children"] = node.children;
    if (node.children.empty()) {
      e["label"] = node.label;
      e["core_size"] = node.core_size;
    }
    nodes.push_back(std::move(e));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

namespace {

std::string label_text(int l) { return l > 0 ? std::to_string(l) : "NA"; }

}  // namespace

void write_artifacts(const RunArtifact& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t n = run.data.rows();

  std::string labels = "index,label\n";
  std::string cores = "index,core\n";
  for (std::size_t i = 0; i < n; ++i) {
    labels += std::to_string(i) + "," + label_text(run.classes.labels[i]) + "\n";
    cores += std::to_string(i) + "," + label_text(run.scan.cores.labels[i]) + "\n";
  }
  write_text(dir / "labels.csv", labels);
  write_text(dir / "cores.csv", cores);
  write_text(dir / "tree.json", tree_json(run.scan.tree));
  write_text(dir / "tree.txt", tree_text(run.scan.tree));

  std::string mode = "p,m\n";
  for (std::size_t k = 0; k < run.scan.mode.p.size(); ++k) {
    mode += format_double(run.scan.mode.p[k]) + "," + std::to_string(run.scan.mode.m[k]) + "\n";
  }
  write_text(dir / "modefn.csv", mode);

  std::string sil = "index,label,dbs\n";
  if (run.silhouette) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& v = run.silhouette->values;
    const auto& lab = run.classes.labels;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (lab[a] != lab[b]) return lab[a] < lab[b];
      return v[a] > v[b];
    });
    for (std::size_t i : order) sil += std::to_string(i) + "," + std::to_string(lab[i]) + "," + format_double(v[i]) + "\n";
  }
  write_text(dir / "dbs.csv", sil);
  write_text(dir / "params.json", params_json(run.config));

  std::string data;
  for (std::size_t j = 0; j < run.names.size(); ++j) data += (j ? "," : "") + run.names[j];
  data += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < run.data.cols(); ++j) data += (j ? "," : "") + format_double(run.data(i, j));
    data += "\n";
  }
  write_text(dir / "data.csv", data);

  std::string dens = "index,density\n";
  for (std::size_t i = 0; i < n; ++i) dens += std::to_string(i) + "," + format_double(run.densities[i]) + "\n";
  write_text(dir / "density.csv", dens);

  const ConnectionGraph& g = *run.graph;
  const bool pairs = g.has_amplitudes();
  std::string edges = pairs ? "i,j,R\n" : "i,j\n";
  for (const Edge& e : g.edges()) {
    edges += std::to_string(e.i) + "," + std::to_string(e.j);
    if (pairs) edges += "," + format_double(static_cast<double>(g.amplitudes().at(e.i, e.j)));
    edges += "\n";
  }
  write_text(dir / "graph.csv", edges);

  std::string stages = "index,stage,label,score\n";
  for (const StageRecord& r : run.classes.trace) {
    stages += std::to_string(r.index) + "," + std::to_string(r.stage) + "," + std::to_string(r.label) + "," +
              format_double(r.score) + "\n";
  }
  write_text(dir / "stages.csv", stages);

  if (pairs) g.amplitudes().save(dir / "amplitudes.bin");
}

}  // namespace densitree

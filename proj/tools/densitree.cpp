#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numeric>
#include <algorithm>
#include <string>

#include "densitree/classify.hpp"
#include "densitree/diagnostics.hpp"
#include "densitree/error.hpp"
#include "densitree/io.hpp"
#include "densitree/kde.hpp"
#include "densitree/mixed.hpp"
#include "densitree/parallel.hpp"
#include "densitree/pipeline.hpp"
#include "densitree/plot.hpp"

namespace fs = std::filesystem;
using namespace densitree;

namespace {

void print_summary(const RunArtifact& run, const fs::path& out) {
  const int M = run.scan.cores.M;
  std::vector<int> core_count(static_cast<std::size_t>(M) + 1, 0);
  std::vector<int> final_count(static_cast<std::size_t>(M) + 1, 0);
  for (int l : run.scan.cores.labels) ++core_count[static_cast<std::size_t>(l)];
  for (int l : run.classes.labels) ++final_count[static_cast<std::size_t>(l)];
  std::printf("clusters: %d (graph %s)\n", M, std::string(to_string(*run.config.graphtype)).c_str());
  std::printf("cores:");
  for (int m = 1; m <= M; ++m) std::printf(" %d", core_count[static_cast<std::size_t>(m)]);
  std::printf("  NA %d\n", core_count[0]);
  std::printf("final:");
  for (int m = 1; m <= M; ++m) std::printf(" %d", final_count[static_cast<std::size_t>(m)]);
  if (final_count[0] > 0) std::printf("  NA %d", final_count[0]);
  std::printf("\n%s", tree_text(run.scan.tree).c_str());
  std::printf("artifacts in %s\n", out.string().c_str());
}

std::vector<std::size_t> parse_index_list(const std::string& s, std::size_t d) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      const long v = std::stol(tok);
      if (v < 1 || static_cast<std::size_t>(v) > d) throw InputError("column " + tok + " out of range");
      out.push_back(static_cast<std::size_t>(v - 1));
    } catch (const std::logic_error&) {
      throw InputError("bad column list '" + s + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(',', start);
    try {
      out.push_back(std::stod(s.substr(start, end == std::string::npos ? std::string::npos : end - start)));
    } catch (const std::logic_error&) {
      throw InputError("bad number list '" + s + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

Bandwidth make_bandwidth(const Matrix& data, double hmult, bool adaptive) {
  auto h = h_norm(data);
  for (double& v : h) v *= hmult;
  return adaptive ? Bandwidth::adaptive(hprop2f(data, h)) : Bandwidth::fixed(h);
}

MixedTable read_mixed(const fs::path& table_path, const fs::path& types_path) {
  const CsvTable csv = read_csv(table_path);
  nlohmann::json types;
  try {
    types = nlohmann::json::parse(read_text(types_path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad types manifest: ") + e.what());
  }
  if (!types.is_object()) throw InputError("types manifest must map column names to types");
  MixedTable table;
  for (std::size_t j = 0; j < csv.header.size(); ++j) {
    const std::string& name = csv.header[j];
    if (!types.contains(name)) continue;
    MixedColumn col;
    col.name = name;
    const auto& spec = types.at(name);
    try {
      if (spec.is_string()) {
        col.type = parse_column_type(spec.get<std::string>());
      } else {
        col.type = parse_column_type(spec.at("type").get<std::string>());
        if (spec.contains("levels")) col.levels = spec.at("levels").get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError("bad type entry for '" + name + "': " + e.what());
    }
    for (const auto& row : csv.rows) col.cells.push_back(row[j]);
    table.columns.push_back(std::move(col));
  }
  for (const auto& [name, spec] : types.items()) {
    const bool found = std::any_of(table.columns.begin(), table.columns.end(),
                                   [&](const MixedColumn& c) { return c.name == name; });
    if (!found) throw InputError("types manifest names unknown column '" + name + "'");
  }
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering by nonparametric density estimation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: runtime default; env DENSITREE_THREADS)")
      ->envname("DENSITREE_THREADS")
      ->check(CLI::NonNegativeNumber);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster a numeric CSV and write the run artifacts");
  std::string data_path, out_dir = "run", params_path, graphtype = "auto", kernel = "gaussian", bwtype = "fixed";
  RunConfig cfg;
  double hmult = 0.0;
  cluster->add_option("--data", data_path, "Numeric CSV with a header row");
  cluster->add_option("--params", params_path, "params.json of an earlier run; flags given here override it");
  cluster->add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* o_graph = cluster->add_option(
      "--graphtype", graphtype,
      "auto|unidimensional|delaunay|pairs. auto picks unidimensional for d = 1, delaunay for d = 2 or 3 and "
      "pairs otherwise (Delaunay is implemented for d <= 3 only)");
  auto* o_lambda = cluster->add_option("--lambda", cfg.lambda, "Valley tolerance for the pairs graph");
  auto* o_kernel = cluster->add_option("--kernel", kernel, "gaussian|t7");
  auto* o_bw = cluster->add_option("--bwtype", bwtype, "fixed|adaptive");
  auto* o_hmult = cluster->add_option("--hmult", hmult, "Bandwidth shrinkage (default 0.75 for d <= 6, else 1)");
  auto* o_grid = cluster->add_option("--n-grid", cfg.n_grid, "Probability grid size for the level-set scan");
  auto* o_gp = cluster->add_option("--grid-pairs", cfg.grid_pairs, "Points per segment for the pairs graph");
  auto* o_stage = cluster->add_option("--n-stage", cfg.n_stage, "Classification stages (0: leave cores only)");
  auto* o_se = cluster->add_option("--se", cfg.se, "Weight log-ratios by their standard errors");
  auto* o_hcores = cluster->add_option(
      "--hcores", cfg.hcores, "Classify with the global bandwidth (true) or per-group bandwidths (false)");

  // rethreshold
  auto* rethr = app.add_subcommand("rethreshold", "Recluster a pairs run at a new lambda from its stored amplitudes");
  std::string run_dir, rethr_out;
  double new_lambda = 0.0;
  rethr->add_option("--run", run_dir, "Run directory of an earlier pairs run")->required();
  rethr->add_option("--lambda", new_lambda, "New valley tolerance")->required();
  rethr->add_option("--out", rethr_out, "Output directory (default: <run>-lambda<value>)");

  // density
  auto* dens = app.add_subcommand("density", "Kernel density estimate");
  std::string d_data, d_eval, d_out, d_cols, d_kernel = "gaussian", d_bw = "fixed";
  double d_hmult = 1.0;
  int d_grid = 0;
  dens->add_option("--data", d_data, "Numeric CSV")->required();
  dens->add_option("--eval", d_eval, "CSV of evaluation points (default: the data)");
  dens->add_option("--grid", d_grid, "Evaluate a grid of this many points per axis over the data range");
  dens->add_option("--cols", d_cols, "1-based columns for a marginal grid, e.g. 1,3 (default: all)");
  dens->add_option("--kernel", d_kernel, "gaussian|t7");
  dens->add_option("--bwtype", d_bw, "fixed|adaptive");
  dens->add_option("--hmult", d_hmult, "Bandwidth multiplier")->capture_default_str();
  dens->add_option("--out", d_out, "Output CSV (default: stdout)");

  // dbs
  auto* dbs_cmd = app.add_subcommand("dbs", "Density-based silhouette of a given partition");
  std::string s_data, s_labels, s_priors, s_out, s_kernel = "gaussian";
  double s_hmult = 0.0;
  dbs_cmd->add_option("--data", s_data, "Numeric CSV")->required();
  dbs_cmd->add_option("--labels", s_labels, "CSV whose last column holds labels 1..M")->required();
  dbs_cmd->add_option("--priors", s_priors, "Comma-separated class priors (default: class proportions)");
  dbs_cmd->add_option("--kernel", s_kernel, "gaussian|t7");
  auto* o_s_hmult = dbs_cmd->add_option("--hmult", s_hmult, "Bandwidth shrinkage (default 0.75 for d <= 6, else 1)");
  dbs_cmd->add_option("--out", s_out, "Output CSV (default: stdout)");

  // ari
  auto* ari = app.add_subcommand("ari", "Adjusted Rand index between two labelings");
  std::string a_path, b_path;
  ari->add_option("a", a_path, "First labels CSV (last column)")->required();
  ari->add_option("b", b_path, "Second labels CSV (last column)")->required();

  // mds
  auto* mds = app.add_subcommand("mds", "Gower dissimilarity and classical scaling of a mixed-type table");
  std::string m_table, m_types, m_out, m_append;
  int m_k = 2;
  mds->add_option("--table", m_table, "CSV table")->required();
  mds->add_option("--types", m_types, "JSON manifest: column name -> numeric|ordratio|symm|asymm|nominal")->required();
  mds->add_option("--k", m_k, "Number of coordinates")->capture_default_str();
  mds->add_option("--append", m_append, "Comma-separated numeric columns to append to the coordinates");
  mds->add_option("--out", m_out, "Output CSV (default: stdout)");

  // plot
  auto* plt = app.add_subcommand("plot", "SVG diagnostics of a run directory");
  std::string p_run, p_out;
  int p_which = 0;
  plt->add_option("--run", p_run, "Run directory")->required();
  plt->add_option("--which", p_which, "1 mode function, 2 tree, 3 scatterplot matrix, 4 silhouette (default: all)");
  plt->add_option("--out", p_out, "Output directory (default: the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(threads);

    if (*cluster) {
      RunConfig run_cfg;
      if (!params_path.empty()) run_cfg = parse_params_json(read_text(params_path));
      if (!data_path.empty()) run_cfg.data_path = data_path;
      if (run_cfg.data_path.empty()) throw InputError("--data is required (or a params file naming the data)");
      if (o_graph->count()) run_cfg.graphtype = graphtype == "auto" ? std::nullopt : std::optional(parse_graph_type(graphtype));
      if (o_lambda->count()) run_cfg.lambda = cfg.lambda;
      if (o_kernel->count()) run_cfg.kernel = parse_kernel(kernel);
      if (o_bw->count()) {
        if (bwtype != "fixed" && bwtype != "adaptive") throw InputError("--bwtype must be fixed or adaptive");
        run_cfg.adaptive = bwtype == "adaptive";
      }
      if (o_hmult->count()) run_cfg.hmult = hmult;
      if (o_grid->count()) run_cfg.n_grid = cfg.n_grid;
      if (o_gp->count()) run_cfg.grid_pairs = cfg.grid_pairs;
      if (o_stage->count()) run_cfg.n_stage = cfg.n_stage;
      if (o_se->count()) run_cfg.se = cfg.se;
      if (o_hcores->count()) run_cfg.hcores = cfg.hcores;
      const NumericData data = read_numeric_csv(run_cfg.data_path);
      const RunArtifact run = run_cluster(data.names, data.values, run_cfg);
      write_artifacts(run, out_dir);
      print_summary(run, out_dir);
    } else if (*rethr) {
      if (rethr_out.empty()) rethr_out = run_dir + "-lambda" + format_double(new_lambda);
      const RunArtifact run = run_rethreshold(run_dir, new_lambda);
      write_artifacts(run, rethr_out);
      print_summary(run, rethr_out);
    } else if (*dens) {
      const NumericData data = read_numeric_csv(d_data);
      if (d_bw != "fixed" && d_bw != "adaptive") throw InputError("--bwtype must be fixed or adaptive");
      if (!(d_hmult > 0.0)) throw InputError("--hmult must be positive");
      Matrix sample = data.values;
      std::vector<std::string> names = data.names;
      Bandwidth bw = make_bandwidth(sample, d_hmult, d_bw == "adaptive");
      if (!d_cols.empty()) {
        const auto cols = parse_index_list(d_cols, sample.cols());
        // Marginal of a product-kernel estimate: drop the other coordinates.
        if (bw.is_fixed()) {
          std::vector<double> h;
          for (std::size_t c : cols) h.push_back(bw.fixed_h()[c]);
          bw = Bandwidth::fixed(h);
        } else {
          bw = Bandwidth::adaptive(bw.adaptive_h().select_cols(cols));
        }
        sample = sample.select_cols(cols);
        std::vector<std::string> kept;
        for (std::size_t c : cols) kept.push_back(names[c]);
        names = kept;
      }
      Matrix eval = sample;
      if (!d_eval.empty()) {
        const NumericData e = read_numeric_csv(d_eval);
        eval = e.values;
      } else if (d_grid > 0) {
        if (d_grid < 2) throw InputError("--grid needs at least 2 points per axis");
        const std::size_t d = sample.cols();
        std::size_t total = 1;
        for (std::size_t j = 0; j < d; ++j) {
          total *= static_cast<std::size_t>(d_grid);
          if (total > 4000000) throw InputError("grid too large; use --cols to pick a marginal");
        }
        eval = Matrix(total, d);
        for (std::size_t k = 0; k < total; ++k) {
          std::size_t rest = k;
          for (std::size_t j = d; j-- > 0;) {
            const auto col = sample.column(j);
            const double lo = *std::min_element(col.begin(), col.end());
            const double hi = *std::max_element(col.begin(), col.end());
            const std::size_t step = rest % static_cast<std::size_t>(d_grid);
            rest /= static_cast<std::size_t>(d_grid);
            eval(k, j) = lo + (hi - lo) * static_cast<double>(step) / (d_grid - 1);
          }
        }
      }
      const auto f = density(eval, sample, parse_kernel(d_kernel), bw);
      std::string csv;
      for (const auto& n : names) csv += n + ",";
      csv += "density\n";
      for (std::size_t k = 0; k < eval.rows(); ++k) {
        for (std::size_t j = 0; j < eval.cols(); ++j) csv += format_double(eval(k, j)) + ",";
        csv += format_double(f[k]) + "\n";
      }
      if (d_out.empty()) std::fputs(csv.c_str(), stdout);
      else write_text(d_out, csv);
    } else if (*dbs_cmd) {
      const NumericData data = read_numeric_csv(s_data);
      const auto labels = read_labels(s_labels);
      if (labels.size() != data.values.rows()) throw InputError("labels and data differ in length");
      std::optional<std::vector<double>> priors;
      if (!s_priors.empty()) priors = parse_number_list(s_priors);
      const double hm = o_s_hmult->count() ? s_hmult : (data.values.cols() <= 6 ? 0.75 : 1.0);
      const DbsResult res = dbs(data.values, labels, priors, parse_kernel(s_kernel), hm);
      if (res.priors_rescaled) std::fprintf(stderr, "warning: priors rescaled to sum to 1\n");
      std::vector<std::size_t> order(labels.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (labels[a] != labels[b]) return labels[a] < labels[b];
        return res.values[a] > res.values[b];
      });
      std::string csv = "index,label,dbs\n";
      for (std::size_t i : order) {
        csv += std::to_string(i) + "," + std::to_string(labels[i]) + "," + format_double(res.values[i]) + "\n";
      }
      if (s_out.empty()) std::fputs(csv.c_str(), stdout);
      else write_text(s_out, csv);
    } else if (*ari) {
      const auto a = read_labels(a_path);
      const auto b = read_labels(b_path);
      std::printf("%s\n", format_double(adjusted_rand_index(a, b)).c_str());
    } else if (*mds) {
      const MixedTable table = read_mixed(m_table, m_types);
      const MdsResult res = classical_mds(gower(table), m_k);
      std::vector<std::string> names;
      for (int c = 1; c <= m_k; ++c) names.push_back("mds" + std::to_string(c));
      Matrix extra(res.coords.rows(), 0);
      if (!m_append.empty()) {
        const CsvTable csv = read_csv(m_table);
        std::vector<std::string> wanted;
        std::size_t start = 0;
        while (true) {
          const auto end = m_append.find(',', start);
          wanted.push_back(m_append.substr(start, end == std::string::npos ? std::string::npos : end - start));
          if (end == std::string::npos) break;
          start = end + 1;
        }
        CsvTable sub{wanted, std::vector<std::vector<std::string>>(csv.rows.size()), csv.line};
        for (const auto& w : wanted) {
          const auto it = std::find(csv.header.begin(), csv.header.end(), w);
          if (it == csv.header.end()) throw InputError("unknown column '" + w + "'");
          const auto j = static_cast<std::size_t>(it - csv.header.begin());
          for (std::size_t i = 0; i < csv.rows.size(); ++i) sub.rows[i].push_back(csv.rows[i][j]);
        }
        extra = to_numeric(sub, m_table).values;
        names.insert(names.end(), wanted.begin(), wanted.end());
      }
      std::string out;
      for (std::size_t j = 0; j < names.size(); ++j) out += (j ? "," : "") + names[j];
      out += "\n";
      for (std::size_t i = 0; i < res.coords.rows(); ++i) {
        for (std::size_t j = 0; j < res.coords.cols(); ++j) out += (j ? "," : "") + format_double(res.coords(i, j));
        for (std::size_t j = 0; j < extra.cols(); ++j) out += "," + format_double(extra(i, j));
        out += "\n";
      }
      if (m_out.empty()) std::fputs(out.c_str(), stdout);
      else write_text(m_out, out);
    } else if (*plt) {
      if (p_which < 0 || p_which > 4) throw InputError("--which must be 1, 2, 3 or 4");
      const fs::path dir = p_out.empty() ? fs::path(p_run) : fs::path(p_out);
      fs::create_directories(dir);
      static const std::map<int, std::string> files{{1, "modefn.svg"}, {2, "tree.svg"}, {3, "scatter.svg"}, {4, "dbs.svg"}};
      for (const auto& [which, name] : files) {
        if (p_which != 0 && p_which != which) continue;
        write_text(dir / name, plot(p_run, which));
      }
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DegenerateError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}

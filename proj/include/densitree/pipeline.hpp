#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "densitree/classify.hpp"
#include "densitree/diagnostics.hpp"
#include "densitree/graph.hpp"
#include "densitree/kde.hpp"
#include "densitree/levelset.hpp"
#include "densitree/matrix.hpp"

namespace densitree {

struct RunConfig {
  std::optional<GraphType> graphtype;  // empty: choose from d
  double lambda = 0.1;
  KernelKind kernel = KernelKind::Gaussian;
  bool adaptive = false;
  std::optional<double> hmult;  // empty: 3/4 when d <= 6, else 1
  int n_grid = 50;
  int grid_pairs = 10;
  int n_stage = 5;
  bool se = true;
  bool hcores = true;
  std::string data_path;  // echoed in params.json only
};

/// d = 1 unidimensional, d = 2 or 3 Delaunay, otherwise pairs.
GraphType auto_graph_type(std::size_t d);

/// Config with every optional filled in for data of dimension d; validates ranges.
RunConfig resolve(const RunConfig& cfg, std::size_t d);

struct RunArtifact {
  RunConfig config;  // resolved
  std::vector<std::string> names;
  Matrix data;
  std::vector<double> global_h;  // h_norm * hmult
  std::vector<double> densities;
  std::optional<ConnectionGraph> graph;
  ScanResult scan;
  ClassifyResult classes;
  std::optional<DbsResult> silhouette;
  double graph_seconds = 0.0;
};

/// Density, graph, level-set scan, classification and diagnostics.
RunArtifact run_cluster(const std::vector<std::string>& names, const Matrix& data, const RunConfig& cfg);

/// Re-runs everything after the density on the stored amplitudes of a pairs
/// run directory, with a new lambda.
RunArtifact run_rethreshold(const std::filesystem::path& run_dir, double lambda);

/// Writes labels.csv, cores.csv, tree.json, tree.txt, modefn.csv, dbs.csv,
/// params.json, data.csv, density.csv, graph.csv, stages.csv and, for pairs
/// graphs, amplitudes.bin.
void write_artifacts(const RunArtifact& run, const std::filesystem::path& dir);

std::string params_json(const RunConfig& resolved);
RunConfig parse_params_json(const std::string& text);

std::string tree_text(const ClusterTree& tree);
std::string tree_json(const ClusterTree& tree);

}  // namespace densitree

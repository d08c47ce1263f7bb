#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "densitree/error.hpp"
#include "densitree/io.hpp"
#include "densitree/parallel.hpp"
#include "densitree/pipeline.hpp"
#include "support/oracles.hpp"

using namespace densitree;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("densitree-pipeline-" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("densitree-pipeline-" + name);
  write_text(p, text);
  return p;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text(e.path());
  return out;
}

std::vector<std::string> names_for(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back("x" + std::to_string(j + 1));
  return out;
}

}  // namespace

TEST_CASE("CSV reading") {
  const auto ok = read_numeric_csv(write_file("ok.csv", "a,\"b\"\n1,2\n\n3.5,-4e-1\n"));
  CHECK(ok.names == std::vector<std::string>{"a", "b"});
  CHECK(ok.values == Matrix(2, 2, {1.0, 2.0, 3.5, -0.4}));
  CHECK_THROWS_AS(read_csv(write_file("empty.csv", "")), InputError);
  CHECK_THROWS_AS(read_csv(write_file("header.csv", "a,b\n")), InputError);
  CHECK_THROWS_AS(read_csv(write_file("ragged.csv", "a,b\n1,2\n3\n")), InputError);
  CHECK_THROWS_AS(read_numeric_csv(write_file("text.csv", "a,b\n1,x\n")), InputError);
  CHECK_THROWS_AS(read_numeric_csv(write_file("inf.csv", "a\nInf\n")), InputError);
  CHECK_THROWS_AS(read_csv(fs::temp_directory_path() / "densitree-no-such-file.csv"), InputError);
  try {
    read_csv(write_file("ragged2.csv", "a,b\n1,2\n3,4\n5\n"));
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("labels and number formatting") {
  CHECK(read_labels(write_file("labels.csv", "index,label\n1,2\n2,NA\n3,1\n")) == std::vector<int>{2, 0, 1});
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "Inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-Inf");
  CHECK(format_double(std::nan("")) == "NA");
}

TEST_CASE("config resolution") {
  RunConfig cfg;
  CHECK(*resolve(cfg, 1).graphtype == GraphType::Unidimensional);
  CHECK(*resolve(cfg, 3).graphtype == GraphType::Delaunay);
  CHECK(*resolve(cfg, 4).graphtype == GraphType::Pairs);
  CHECK(*resolve(cfg, 6).hmult == 0.75);
  CHECK(*resolve(cfg, 7).hmult == 1.0);
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(resolve(cfg, 2), InputError);
  cfg.lambda = 0.1;
  cfg.graphtype = GraphType::Delaunay;
  CHECK_THROWS_AS(resolve(cfg, 5), InputError);
}

TEST_CASE("params round trip") {
  RunConfig cfg;
  cfg.graphtype = GraphType::Pairs;
  cfg.lambda = 0.23;
  cfg.kernel = KernelKind::StudentT7;
  cfg.adaptive = true;
  cfg.hmult = 1.2;
  cfg.n_grid = 31;
  cfg.grid_pairs = 12;
  cfg.n_stage = 3;
  cfg.se = false;
  cfg.hcores = false;
  cfg.data_path = "x.csv";
  const std::string text = params_json(cfg);
  const RunConfig back = parse_params_json(text);
  CHECK(params_json(back) == text);
  CHECK(back.lambda == 0.23);
  CHECK(*back.hmult == 1.2);
  CHECK(back.adaptive);
  CHECK_FALSE(back.se);
  CHECK(text.find("\"data\"") < text.find("\"graphtype\""));
}

TEST_CASE("a params file reproduces the run") {
  std::mt19937_64 rng(81);
  const Matrix x = oracle::normal_sample(rng, 50, 4);
  RunConfig cfg;
  cfg.lambda = 0.3;
  cfg.n_grid = 20;
  const auto a = run_cluster(names_for(4), x, cfg);
  const fs::path da = scratch("params-a"), db = scratch("params-b");
  write_artifacts(a, da);
  const auto b = run_cluster(names_for(4), x, parse_params_json(read_text(da / "params.json")));
  write_artifacts(b, db);
  CHECK(read_dir(da) == read_dir(db));
}

TEST_CASE("rethreshold of a run directory") {
  std::mt19937_64 rng(82);
  Matrix x = oracle::normal_sample(rng, 60, 4);
  for (std::size_t i = 0; i < 30; ++i) x(i, 0) += 5.0;
  RunConfig cfg;
  const auto cold = run_cluster(names_for(4), x, cfg);
  const fs::path dir = scratch("rethreshold-src"), re = scratch("rethreshold-out"), same = scratch("rethreshold-same");
  write_artifacts(cold, dir);
  write_artifacts(run_rethreshold(dir, 0.1), same);
  CHECK(read_dir(same) == read_dir(dir));
  cfg.lambda = 0.2;
  const fs::path cold2 = scratch("rethreshold-cold");
  write_artifacts(run_cluster(names_for(4), x, cfg), cold2);
  write_artifacts(run_rethreshold(dir, 0.2), re);
  CHECK(read_dir(re) == read_dir(cold2));
  CHECK_THROWS_AS(run_rethreshold(dir, 1.5), InputError);
  fs::remove(dir / "amplitudes.bin");
  CHECK_THROWS_AS(run_rethreshold(dir, 0.2), DegenerateError);
}

TEST_CASE("artifact files") {
  std::mt19937_64 rng(83);
  Matrix x = oracle::normal_sample(rng, 80, 2);
  for (std::size_t i = 0; i < 40; ++i) x(i, 0) += 8.0;
  const auto run = run_cluster(names_for(2), x, RunConfig{});
  const fs::path dir = scratch("artifacts");
  write_artifacts(run, dir);
  for (const char* f : {"labels.csv", "cores.csv", "tree.json", "tree.txt", "modefn.csv", "dbs.csv", "params.json",
                        "data.csv", "density.csv", "graph.csv", "stages.csv"})
    CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "amplitudes.bin"));
  CHECK(read_labels(dir / "labels.csv") == run.classes.labels);
  CHECK(read_numeric_csv(dir / "data.csv").values == x);
  CHECK(read_numeric_csv(dir / "density.csv").values.column(1) == run.densities);
  CHECK(read_text(dir / "labels.csv").rfind("index,label\n", 0) == 0);
}

TEST_CASE("wine subset silhouette is mostly positive") {
  const auto data = read_numeric_csv(fs::path(DENSITREE_DATA_DIR) / "wine-sub.csv");
  const auto run = run_cluster(data.names, data.values, RunConfig{});
  REQUIRE(run.silhouette);
  std::size_t positive = 0;
  for (double v : run.silhouette->values) positive += v > 0.0 ? 1 : 0;
  MESSAGE("positive dbs: " << positive << " of " << run.silhouette->values.size());
  CHECK(positive >= 160);  // 90% of 178
}

TEST_SUITE("property") {
  TEST_CASE("artifacts do not depend on the thread count") {
    std::mt19937_64 rng(801);
    std::uniform_real_distribution<double> u;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t d = std::vector<std::size_t>{1, 2, 3, 4}[static_cast<std::size_t>(trial % 4)];
      const std::size_t n = 25 + static_cast<std::size_t>(trial % 30);
      Matrix x = oracle::normal_sample(rng, n, d);
      for (std::size_t i = 0; i < n / 2; ++i) x(i, 0) += 4.0 * u(rng) + 2.0;
      RunConfig cfg;
      cfg.adaptive = trial % 3 == 0;
      cfg.kernel = trial % 5 == 0 ? KernelKind::StudentT7 : KernelKind::Gaussian;
      cfg.n_grid = 10 + trial % 40;
      std::map<std::string, std::string> first;
      for (int threads : {1, 4, 8}) {
        set_thread_count(threads);
        const fs::path dir = scratch("threads-" + std::to_string(threads));
        write_artifacts(run_cluster(names_for(d), x, cfg), dir);
        auto files = read_dir(dir);
        if (threads == 1) first = std::move(files);
        else CHECK(files == first);
      }
      set_thread_count(0);
    }
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "beamprint/app/commands.hpp"
#include "beamprint/errors.hpp"

using namespace beamprint;
using namespace beamprint::app;
namespace fs = std::filesystem;
using scene::MainClass;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("beamprint_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

AppConfig small_config() {
  AppConfig c;
  c.population.counts = {{MainClass::Pedestrian, 30},
                         {MainClass::Bicycle, 10},
                         {MainClass::Car, 24},
                         {MainClass::Bus, 8},
                         {MainClass::Motorcycle, 16}};
  c.crossing_pedestrians = 14;
  c.simulation.duration_s = 12.0;
  return c;
}

// Simulated once and shared by the cases below.
const fs::path& small_dataset() {
  static const fs::path dir = [] {
    const fs::path d = scratch("data");
    cmd_simulate(small_config(), d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("simulate writes a loadable dataset") {
  const Dataset d = load_dataset(small_dataset());
  CHECK(d.manifest.size() == 88);
  CHECK(!d.reports.empty());
  CHECK(config_to_json(d.config) == config_to_json(small_config()));
  for (const char* f : {"reports.csv", "manifest.jsonl", "gob.csv", "run_meta.json"}) {
    CHECK(fs::exists(small_dataset() / f));
  }
  CHECK_THROWS_AS(load_dataset(small_dataset() / "missing"), DataError);
}

TEST_CASE("eval of the saved model reproduces the held-out block exactly") {
  ExperimentRecipe r = find_recipe("table1_extratrees_ped");
  r.extra_trees.n_trees = 10;
  const fs::path out = scratch("train");
  const Json train = cmd_train(small_config(), small_dataset(), r, out);
  REQUIRE(fs::exists(out / "model.cbor"));
  const Json eval = cmd_eval(out / "model.cbor", small_dataset(), EvalSplit::Test, out);
  CHECK(eval["evaluation"].dump() == train["held_out"].dump());
  CHECK(train["mean_test_error"].get<double>() == train["held_out"]["misclassification_rate"].get<double>());
  const double err = train["mean_test_error"].get<double>();
  CHECK(err >= 0.0);
  CHECK(err <= 1.0);

  // Train split: fully grown trees memorise their own rows.
  const Json on_train = cmd_eval(out / "model.cbor", small_dataset(), EvalSplit::Train, out);
  CHECK(on_train["evaluation"]["misclassification_rate"].get<double>() == 0.0);
}

TEST_CASE("a single cluster has the majority-label purity") {
  ExperimentRecipe r = find_recipe("fig4");
  r.k = 1;
  const fs::path out = scratch("k1");
  const Json m = cmd_cluster(small_config(), small_dataset(), r, out);
  std::istringstream scatter(read_file(out / "scatter.csv"));
  std::string line;
  std::getline(scatter, line);
  std::map<std::string, int> counts;
  int total = 0;
  while (std::getline(scatter, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (cells[2] != "test") continue;
    ++counts[cells[3]];
    ++total;
  }
  int majority = 0;
  for (const auto& [label, n] : counts) majority = std::max(majority, n);
  REQUIRE(total > 0);
  CHECK(m["purity"]["test_rows"].get<double>() == doctest::Approx(double(majority) / total));
  CHECK(m["rows"]["test"].get<int>() == total);
}

TEST_CASE("clustering metrics are well formed") {
  const fs::path out = scratch("fig4");
  const Json m = cmd_cluster(small_config(), small_dataset(), find_recipe("fig4"), out);
  const double p = m["purity"]["test_ues"].get<double>();
  CHECK(p >= 0.5);  // two clusters can never do worse than the majority half
  CHECK(p <= 1.0);
  CHECK(m["pca"]["cumulative_explained_variance"].get<double>() <= 1.0 + 1e-12);
  CHECK(m["kmeans"]["k"] == 2);
  CHECK_THROWS_AS(cmd_cluster(small_config(), small_dataset(), find_recipe("table1_adaboost"), out),
                  ConfigError);
}

TEST_CASE("UE split is stratified, disjoint and reproducible") {
  std::map<int, int> labels;
  for (int u = 0; u < 40; ++u) labels[u] = u < 30 ? 0 : (u < 38 ? 1 : 2);
  labels[40] = 3;
  const UeSplit a = split_by_ue(labels, 0.3, 7);
  const UeSplit b = split_by_ue(labels, 0.3, 7);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() + a.test.size() == labels.size());
  std::map<int, int> test_per_label;
  for (int u : a.test) {
    CHECK_FALSE(a.train.contains(u));
    ++test_per_label[labels[u]];
  }
  CHECK(test_per_label[0] == 9);
  CHECK(test_per_label[1] == 2);  // round(2.4)
  CHECK(test_per_label[2] == 1);  // at least one, never both
  CHECK(test_per_label[3] == 0);  // a lone UE stays in training
  const UeSplit c = split_by_ue(labels, 0.3, 8);
  CHECK(c.test != a.test);
}

TEST_CASE("a model refuses a dataset with a different report width") {
  ExperimentRecipe r = find_recipe("table1_extratrees_pednc");
  r.extra_trees.n_trees = 5;
  const fs::path out = scratch("narrow_model");
  cmd_train(small_config(), small_dataset(), r, out);
  AppConfig narrow = small_config();
  narrow.simulation.report_width = 8;
  narrow.simulation.duration_s = 4.0;
  const fs::path data = scratch("narrow_data");
  cmd_simulate(narrow, data);
  CHECK_THROWS_AS(cmd_eval(out / "model.cbor", data, EvalSplit::All, out), ModelError);
  CHECK_THROWS_AS(cmd_eval(out / "nothing.cbor", small_dataset(), EvalSplit::All, out), ModelError);
}

}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "beamprint_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    std::ofstream(d / "small.jsonc") << R"({
  // tiny population so every command finishes quickly
  "population": {
    "counts": {"pedestrian": 20, "bicycle": 6, "car": 16, "bus": 4, "motorcycle": 12},
    "crossing_pedestrians": 10
  },
  "simulation": {"duration_s": 10}
})";
    std::ofstream(d / "broken.jsonc") << "{ \"simulation\": { \"duration_s\": 10, } ";
    std::ofstream(d / "unknown.jsonc") << R"({"simulation": {"durations": 10}})";
    std::ofstream(d / "garbage.cbor") << "not a model";
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(BEAMPRINT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string in_work(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("successful commands exit 0") {
  CHECK(run("recipes list") == 0);
  CHECK(run("--help") == 0);
  CHECK(run("--config " + in_work("small.jsonc") + " --out-dir " + in_work("data") + " simulate") == 0);
  CHECK(fs::exists(work_dir() / "data" / "reports.csv"));
  CHECK(run("--config " + in_work("small.jsonc") + " --recipe fig4 --out-dir " + in_work("fig4") +
            " cluster --dataset " + in_work("data")) == 0);
  CHECK(fs::exists(work_dir() / "fig4" / "cluster_metrics.json"));
  CHECK(run("--config " + in_work("small.jsonc") + " --recipe table1_extratrees_pednc --out-dir " +
            in_work("et") + " train --dataset " + in_work("data")) == 0);
  CHECK(run("--out-dir " + in_work("et") + " eval --model " + in_work("et/model.cbor") +
            " --dataset " + in_work("data") + " --split all") == 0);
  CHECK(fs::exists(work_dir() / "et" / "eval_metrics.json"));
}

TEST_CASE("configuration problems exit 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--config " + in_work("broken.jsonc") + " simulate") == 2);
  CHECK(run("--config " + in_work("unknown.jsonc") + " simulate") == 2);
  CHECK(run("--config " + in_work("missing.jsonc") + " simulate") == 2);
  CHECK(run("--recipe nope cluster --dataset " + in_work("data")) == 2);
  CHECK(run("cluster --dataset " + in_work("data")) == 2);
  CHECK(run("--recipe fig7 train --dataset " + in_work("data")) == 2);
}

TEST_CASE("dataset problems exit 3") {
  CHECK(run("--recipe fig4 --out-dir " + in_work("x") + " cluster --dataset " + in_work("no_such_dataset")) == 3);
}

TEST_CASE("model problems exit 4") {
  CHECK(run("--out-dir " + in_work("x") + " eval --model " + in_work("garbage.cbor") + " --dataset " +
            in_work("data")) == 4);
  CHECK(run("--out-dir " + in_work("x") + " eval --model " + in_work("none.cbor") + " --dataset " +
            in_work("data")) == 4);
}

}

// Command-line front end. Exit codes: 0 ok, 1 unexpected, 2 config, 3 data,
// 4 model/schema.
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "beamprint/app/commands.hpp"
#include "beamprint/errors.hpp"

namespace app = beamprint::app;

int main(int argc, char** argv) {
  CLI::App cli{"Beam-report fingerprinting: simulate mmWave measurement reports and classify UE mobility"};
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string recipe_name;
  bool verbose = false;
  cli.add_option("--config", config_path, "JSON (comments allowed) configuration file");
  cli.add_option("--seed", seed, "override simulation seeds (simulate) or the learning seed");
  cli.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  cli.add_option("--recipe", recipe_name, "built-in experiment recipe");
  cli.add_flag("-v,--verbose", verbose, "debug logging");

  std::string dataset;
  std::string model;
  std::string split = "test";
  bool jsonl = false;

  auto* simulate = cli.add_subcommand("simulate", "run the beam-management simulator");
  simulate->add_flag("--jsonl", jsonl, "also write reports.jsonl");
  auto* cluster = cli.add_subcommand("cluster", "PCA + K-means on fingerprints");
  cluster->add_option("--dataset", dataset, "dataset directory")->required();
  auto* embed = cli.add_subcommand("embed", "t-SNE embedding of fingerprints");
  embed->add_option("--dataset", dataset, "dataset directory")->required();
  auto* train = cli.add_subcommand("train", "fit a tree ensemble and report held-out error");
  train->add_option("--dataset", dataset, "dataset directory")->required();
  auto* eval = cli.add_subcommand("eval", "score a saved model on a dataset");
  eval->add_option("--model", model, "model file")->required();
  eval->add_option("--dataset", dataset, "dataset directory")->required();
  eval->add_option("--split", split, "all|train|test (UE split stored in the model)")
      ->capture_default_str();
  auto* recipes = cli.add_subcommand("recipes", "recipe utilities");
  recipes->require_subcommand(1);
  auto* recipes_list = recipes->add_subcommand("list", "list built-in recipes");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }
  app::init_logging(verbose);

  try {
    if (*recipes_list) {
      std::cout << app::recipes_listing();
      return 0;
    }
    if (*eval) {
      app::cmd_eval(model, dataset, app::eval_split_from_string(split), out_dir);
      return 0;
    }
    app::AppConfig config = app::load_config(config_path, app::current_environment());
    if (seed) {
      if (*simulate) {
        config.simulation.seeds = {*seed};
      } else {
        config.learn.seed = *seed;
      }
    }
    const app::ExperimentRecipe* recipe = nullptr;
    if (!recipe_name.empty()) recipe = &app::find_recipe(recipe_name);
    auto need_recipe = [&]() -> const app::ExperimentRecipe& {
      if (!recipe) throw beamprint::ConfigError("--recipe is required for this command");
      return *recipe;
    };

    if (*simulate) {
      app::cmd_simulate(config, out_dir, recipe, jsonl);
    } else if (*cluster) {
      app::cmd_cluster(config, dataset, need_recipe(), out_dir);
    } else if (*embed) {
      app::cmd_embed(config, dataset, need_recipe(), out_dir);
    } else if (*train) {
      auto r = need_recipe();
      if (seed) r.seeds = {*seed};
      app::cmd_train(config, dataset, r, out_dir);
    }
    return 0;
  } catch (const beamprint::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return 2;
  } catch (const beamprint::DataError& e) {
    spdlog::error("data: {}", e.what());
    return 3;
  } catch (const beamprint::ModelError& e) {
    spdlog::error("model: {}", e.what());
    return 4;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

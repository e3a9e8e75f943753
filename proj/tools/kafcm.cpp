// kafcm: experiment pipelines from the command line.
//
//   kafcm generate   --config configs/sine.json
//   kafcm train      --config configs/sine.json --model kafcm
//   kafcm evaluate   --config configs/sine.json --model kafcm --table out/sine/reports/comparison.csv
//   kafcm gridsearch --config configs/sine.json --jobs 4
//   kafcm extract    --config configs/sine.json --edge 1,0
//   kafcm run        --config configs/sine.json
//
// exit: 0 ok, 2 config error, 3 divergence, 4 I/O error

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "kafcm/error.hpp"
#include "kafcm/experiment.hpp"

namespace {

int exit_code(kafcm::ErrorKind kind) {
  switch (kind) {
    case kafcm::ErrorKind::divergence: return 3;
    case kafcm::ErrorKind::io: return 4;
    default: return 2;
  }
}

void print_metrics(const std::string& kind, const kafcm::MetricsReport& r) {
  std::cout << kafcm::comparison_row({kind, r}) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KA-FCM experiment harness"};
  app.require_subcommand(1);

  std::string config_path, experiment, out_dir, model_kind, model_file, dataset_file, table_file, edge;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  auto common = [&](CLI::App* sub) {
    auto* cfg = sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--experiment", experiment, "use built-in defaults for yerkes|sine|mackey")->excludes(cfg);
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
  };

  auto* gen = app.add_subcommand("generate", "write dataset and train/val/test splits");
  common(gen);
  auto* train = app.add_subcommand("train", "train one model kind on data/train.csv");
  common(train);
  train->add_option("--model", model_kind, "kafcm|fcm|mlp (default: config model)");
  auto* eval = app.add_subcommand("evaluate", "score a model file on a dataset");
  common(eval);
  eval->add_option("--model", model_kind, "kind whose model file to load");
  eval->add_option("--model-file", model_file, "explicit model file");
  eval->add_option("--dataset", dataset_file, "dataset CSV (default data/test.csv)");
  eval->add_option("--table", table_file, "comparison CSV to append a row to");
  auto* grid = app.add_subcommand("gridsearch", "resumable G x eta x epochs sweep of the KA-FCM");
  common(grid);
  grid->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);
  auto* extract = app.add_subcommand("extract", "sample one KA-FCM edge and fit closed forms");
  common(extract);
  extract->add_option("--model-file", model_file, "KA-FCM model file (default models/kafcm.json)");
  extract->add_option("--edge", edge, "target,source (0-based)");
  auto* run = app.add_subcommand("run", "generate, train all models, evaluate, extract");
  common(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    kafcm::ExperimentConfig config;
    if (!config_path.empty())
      config = kafcm::load_config(config_path);
    else if (!experiment.empty())
      config = kafcm::ExperimentConfig::defaults(experiment);
    else
      throw kafcm::Error(kafcm::ErrorKind::invalid_config, "one of --config or --experiment is required");
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) config.seed = *seed;
    if (!model_kind.empty()) config.model = model_kind;
    config.validate();

    if (gen->parsed()) {
      kafcm::cmd_generate(config);
      std::cout << "wrote " << kafcm::data_path(config, "dataset").parent_path().string() << '\n';
    } else if (train->parsed()) {
      kafcm::cmd_train(config, config.model);
      std::cout << "wrote " << kafcm::model_path(config, config.model).string() << '\n';
    } else if (eval->parsed()) {
      const auto mf = model_file.empty() ? kafcm::model_path(config, config.model) : std::filesystem::path(model_file);
      const auto df = dataset_file.empty() ? kafcm::data_path(config, "test") : std::filesystem::path(dataset_file);
      std::optional<std::filesystem::path> table;
      if (!table_file.empty()) table = table_file;
      const auto report = kafcm::cmd_evaluate(config, mf, df, table);
      std::cout << kafcm::kComparisonHeader << '\n';
      print_metrics(kafcm::model_kind(kafcm::load_model(mf)), report);
    } else if (grid->parsed()) {
      const auto report = kafcm::cmd_gridsearch(config, jobs);
      std::cout << kafcm::grid_summary_json(report).dump(2) << '\n';
    } else if (extract->parsed()) {
      int target = config.extract_target, source = config.extract_source;
      if (!edge.empty() && std::sscanf(edge.c_str(), "%d,%d", &target, &source) != 2)
        throw kafcm::Error(kafcm::ErrorKind::invalid_config, "--edge expects target,source");
      const auto mf = model_file.empty() ? kafcm::model_path(config, "kafcm") : std::filesystem::path(model_file);
      const auto fits = kafcm::cmd_extract(config, mf, target, source);
      std::cout << kafcm::to_json(fits).dump(2) << '\n';
    } else if (run->parsed()) {
      const auto summary = kafcm::cmd_run(config);
      std::cout << kafcm::kComparisonHeader << '\n';
      for (const auto& row : summary.table) print_metrics(row.model, row.metrics);
      if (!summary.fits.empty()) std::cout << "top fit: " << kafcm::to_json(std::vector{summary.fits.front()})[0].dump() << '\n';
    }
  } catch (const kafcm::Error& e) {
    std::cerr << "error [" << kafcm::to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#pragma once

// Experiment pipelines: config, dataset generation, training of the three
// model kinds, evaluation, grid search and edge extraction. Every command
// reads and writes under config.output_dir:
//
//   data/      dataset.csv train.csv val.csv test.csv (+ .json metadata)
//   models/    <kind>.json <kind>_history.csv
//   reports/   <kind>_metrics.json comparison.csv
//   gridsearch/grid.csv summary.json
//   extract/   edge_<i>_<j>.csv edge_<i>_<j>_fits.json

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kafcm/datagen.hpp"
#include "kafcm/graph.hpp"
#include "kafcm/io.hpp"
#include "kafcm/metrics.hpp"
#include "kafcm/mlp.hpp"
#include "kafcm/symbolic.hpp"
#include "kafcm/training.hpp"

namespace kafcm {

struct ExperimentConfig {
  std::string experiment = "yerkes";  // yerkes | sine | mackey
  std::string model = "kafcm";        // kafcm | fcm | mlp
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  // dataset
  int n_samples = 1000;
  double noise_sd = 0.05;
  double frequency = 3.0;
  double half_width = kSineHalfWidth;
  MackeyGlassParams mackey;
  int lag = 4;
  std::array<double, 3> split{0.64, 0.16, 0.20};

  // KA-FCM
  int grid_size = 4;
  int degree = 3;
  std::array<double, 2> domain{-1.0, 1.0};
  BoundingOp bounding = BoundingOp::identity;
  BaseKind base = BaseKind::silu;
  TrainConfig train{0.1, 610, 0.0, 0, Optimizer::adam};

  // baselines
  TrainConfig mlp = mlp_default_config(0);
  PSOConfig pso;
  BoundingOp fcm_activation = BoundingOp::tanh;

  GridSearchSpace gridsearch = GridSearchSpace::standard();

  // extraction; node indices are 0-based (target, source)
  int extract_target = 1;
  int extract_source = 0;
  int curve_points = 200;

  /// Per-experiment defaults (best configs of the grid search).
  static ExperimentConfig defaults(std::string_view experiment);
  void validate() const;

  /// Time-ordered data split chronologically; everything else is shuffled.
  bool shuffle_split() const { return experiment != "mackey"; }
  ErrorMetric validation_metric() const { return experiment == "mackey" ? ErrorMetric::mape : ErrorMetric::mse; }
};

/// Keys absent from j keep the defaults of j["experiment"]; unknown keys are a
/// config error.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seed streams derived from config.seed.
enum class SeedStream : std::uint64_t { data = 0, split = 1, kafcm = 2, mlp = 3, pso = 4, grid = 5 };
std::uint64_t stream_seed(const ExperimentConfig& config, SeedStream stream);

struct DataSplits {
  Dataset full;
  Dataset train;
  Dataset val;
  Dataset test;
};

DataSplits make_splits(const ExperimentConfig& config);
SupervisedLayout experiment_layout(const ExperimentConfig& config);
KAFCMModel fresh_kafcm(const ExperimentConfig& config, int grid_size, std::uint64_t seed);
StandardFCM fresh_fcm(const ExperimentConfig& config);

struct TrainOutcome {
  ModelFile model;
  std::vector<double> history;
};

/// Trains one model kind with the config's recipe. KA-FCM uses `train`
/// (seeded from the kafcm stream), the MLP `mlp`, the FCM `pso`.
TrainOutcome train_model(const ExperimentConfig& config, std::string_view kind, const Dataset& train);

/// Targets metrics are scored against: the noiseless law when the generator
/// has one, the stored targets otherwise.
MatrixXd evaluation_targets(const Dataset& data);
MetricsReport evaluate_model(const ModelFile& model, const Dataset& data);

std::filesystem::path data_path(const ExperimentConfig& config, std::string_view part);
std::filesystem::path model_path(const ExperimentConfig& config, std::string_view kind);

void cmd_generate(const ExperimentConfig& config);
/// Needs data/train.csv. On divergence the partial history is written and
/// the DivergenceError rethrown.
ModelFile cmd_train(const ExperimentConfig& config, std::string_view kind);
/// A row is appended to `table` when given (header written if the file is new).
MetricsReport cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& model_file,
                           const std::filesystem::path& dataset_file,
                           const std::optional<std::filesystem::path>& table = std::nullopt);
/// Resumes from an existing gridsearch/grid.csv.
GridSearchReport cmd_gridsearch(const ExperimentConfig& config, int jobs);
std::vector<CandidateFit> cmd_extract(const ExperimentConfig& config, const std::filesystem::path& model_file,
                                      int target, int source);

struct ExperimentSummary {
  std::vector<TableRow> table;  // fcm, mlp, kafcm
  std::vector<CandidateFit> fits;
};

/// generate, train all three kinds, evaluate on the test split, and extract
/// the configured edge of the KA-FCM.
ExperimentSummary cmd_run(const ExperimentConfig& config);

}  // namespace kafcm

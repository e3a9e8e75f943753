#pragma once

// On-disk formats: JSON model files, CSV tables. Doubles are written in the
// shortest form that round-trips exactly.

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "kafcm/datagen.hpp"
#include "kafcm/graph.hpp"
#include "kafcm/mlp.hpp"
#include "kafcm/symbolic.hpp"
#include "kafcm/training.hpp"

namespace kafcm {

inline constexpr int kModelFileVersion = 1;

std::string format_double(double value);
double parse_double(std::string_view text);

struct KAFCMFile {
  KAFCMModel model;
  SupervisedLayout layout;
};

struct FCMFile {
  StandardFCM model;
  SupervisedLayout layout;
};

using ModelFile = std::variant<KAFCMFile, FCMFile, MLPParams>;

nlohmann::json to_json(const KnotGrid<double>& grid);
KnotGrid<double> grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EdgeFunction<double>& edge);
nlohmann::json to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& j);

std::string model_kind(const ModelFile& model);
int model_input_dim(const ModelFile& model);
int model_output_dim(const ModelFile& model);
MatrixXd predict(const ModelFile& model, const MatrixXd& inputs);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// `x_0,..,x_{k-1},y_0,..` CSV plus `<stem>.json` metadata sidecar.
std::string dataset_csv(const Dataset& data);
Dataset parse_dataset_csv(const std::string& text);
void save_dataset(const std::filesystem::path& csv_path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& csv_path);
std::filesystem::path metadata_path(const std::filesystem::path& csv_path);
nlohmann::json to_json(const DatasetMetadata& meta);
DatasetMetadata metadata_from_json(const nlohmann::json& j);

/// `t,c_0,..,c_{N-1}`
std::string trajectory_csv(const Trajectory& traj);
/// `epoch,loss`
std::string history_csv(const std::vector<double>& history);
/// `x,phi`
std::string curve_csv(const EdgeCurve& curve);
nlohmann::json to_json(const std::vector<CandidateFit>& fits);

/// `G,eta,epochs,val_error,status`
inline constexpr const char* kGridHeader = "G,eta,epochs,val_error,status";
std::string grid_row_csv(const GridSearchRow& row);
std::string grid_report_csv(const GridSearchReport& report);
std::vector<GridSearchRow> parse_grid_csv(const std::string& text);
nlohmann::json grid_summary_json(const GridSearchReport& report);

}  // namespace kafcm

#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace kafcm {

/// Error summary for one model on one dataset. std_dev_error is the
/// population (1/n) standard deviation of the signed residuals pred - target;
/// mape_percent is empty when any target is exactly zero.
struct MetricsReport {
  double mse = 0.0;
  std::optional<double> mape_percent;
  double max_abs_error = 0.0;
  double std_dev_error = 0.0;
  long n = 0;
};

MetricsReport compute_metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

nlohmann::json to_json(const MetricsReport& report, const std::string& model_id = {},
                       const std::string& dataset_id = {});
MetricsReport metrics_from_json(const nlohmann::json& j);

struct TableRow {
  std::string model;
  MetricsReport metrics;
};

/// CSV header for comparison tables.
inline constexpr const char* kComparisonHeader = "model,mse,mape_percent,max_abs_error,std_dev_error";
std::string comparison_row(const TableRow& row);
std::string comparison_table(const std::vector<TableRow>& rows);

}  // namespace kafcm

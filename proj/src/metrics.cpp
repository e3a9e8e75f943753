#include "kafcm/metrics.hpp"

#include <cmath>

#include "kafcm/error.hpp"
#include "kafcm/io.hpp"

namespace kafcm {

MetricsReport compute_metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size())
    throw Error(ErrorKind::shape_mismatch, "prediction has " + std::to_string(pred.size()) +
                                               " values, target has " + std::to_string(target.size()));
  if (pred.size() == 0) throw Error(ErrorKind::empty_input, "metrics over an empty sequence");

  const Eigen::VectorXd residual = pred - target;
  const double n = static_cast<double>(residual.size());
  MetricsReport r;
  r.n = static_cast<long>(residual.size());
  r.mse = residual.squaredNorm() / n;
  r.max_abs_error = residual.cwiseAbs().maxCoeff();
  const double mean = residual.mean();
  r.std_dev_error = std::sqrt((residual.array() - mean).square().sum() / n);
  if ((target.array() != 0.0).all())
    r.mape_percent = 100.0 * (residual.array() / target.array()).abs().sum() / n;
  return r;
}

nlohmann::json to_json(const MetricsReport& r, const std::string& model_id, const std::string& dataset_id) {
  nlohmann::json j = {{"mse", r.mse},
                      {"mape_percent", r.mape_percent ? nlohmann::json(*r.mape_percent) : nlohmann::json(nullptr)},
                      {"max_abs_error", r.max_abs_error},
                      {"std_dev_error", r.std_dev_error},
                      {"n", r.n}};
  if (!model_id.empty()) j["model"] = model_id;
  if (!dataset_id.empty()) j["dataset"] = dataset_id;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.mse = j.at("mse").get<double>();
  if (!j.at("mape_percent").is_null()) r.mape_percent = j.at("mape_percent").get<double>();
  r.max_abs_error = j.at("max_abs_error").get<double>();
  r.std_dev_error = j.at("std_dev_error").get<double>();
  r.n = j.at("n").get<long>();
  return r;
}

std::string comparison_row(const TableRow& row) {
  const auto& m = row.metrics;
  return row.model + "," + format_double(m.mse) + "," + (m.mape_percent ? format_double(*m.mape_percent) : "") +
         "," + format_double(m.max_abs_error) + "," + format_double(m.std_dev_error);
}

std::string comparison_table(const std::vector<TableRow>& rows) {
  std::string out = std::string(kComparisonHeader) + "\n";
  for (const auto& row : rows) out += comparison_row(row) + "\n";
  return out;
}

}  // namespace kafcm

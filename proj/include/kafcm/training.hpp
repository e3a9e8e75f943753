#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kafcm/datagen.hpp"
#include "kafcm/error.hpp"
#include "kafcm/graph.hpp"

namespace kafcm {

enum class Optimizer { adam, gd };

std::string_view to_string(Optimizer opt);
Optimizer optimizer_from_string(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 1;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;

  void validate() const;
};

/// Which nodes receive the dataset inputs and which nodes are compared with
/// the targets. The query state holds the inputs on their nodes and zero
/// everywhere else.
struct SupervisedLayout {
  std::vector<int> inputs;
  std::vector<int> outputs;

  /// inputs = 0..n_in-1, outputs = n_in..n_in+n_out-1
  static SupervisedLayout feed_forward(int n_in, int n_out);
  int node_count() const;
  /// mask(o, i) set for every output o and input i.
  MaskMatrix edge_mask(int n_nodes) const;
  VectorXd query_state(int n_nodes, const Eigen::Ref<const VectorXd>& input) const;
};

MatrixXd predict(const KAFCMModel& model, const SupervisedLayout& layout, const MatrixXd& inputs);
MatrixXd predict(const StandardFCM& model, const SupervisedLayout& layout, const MatrixXd& inputs);

/// (1/T) sum_t ||pred_t - target_t||^2, one time step per row.
double loss_rec(const MatrixXd& pred, const MatrixXd& target);
double loss_rec(const Trajectory& pred, const Trajectory& target);

/// sum over present edges of sum_k |alpha_k|
double l1_penalty(const KAFCMModel& model);
double loss_total(const KAFCMModel& model, const MatrixXd& pred, const MatrixXd& target, double lambda);

// Flat parameter layout: present edges in row-major (target, source) order,
// each contributing [w_base, w_spline, alpha_0 .. alpha_{K-1}].
Eigen::Index parameter_count(const KAFCMModel& model);
VectorXd parameter_vector(const KAFCMModel& model);
void set_parameters(KAFCMModel& model, const VectorXd& params);

/// Reverse-mode gradient of loss_total for one-step-ahead prediction, laid
/// out like parameter_vector(). The L1 term uses sign(0) := 0.
VectorXd model_gradient(const KAFCMModel& model, const SupervisedLayout& layout, const Dataset& batch,
                        double lambda);

struct TrainResult {
  KAFCMModel model;
  std::vector<double> history;  // loss_total before each update
  double final_loss = 0.0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, std::vector<double> history)
      : Error(ErrorKind::divergence, "non-finite loss or parameters at epoch " + std::to_string(epoch)),
        epoch_(epoch),
        history_(std::move(history)) {}

  int epoch() const { return epoch_; }
  const std::vector<double>& history() const { return history_; }

 private:
  int epoch_;
  std::vector<double> history_;
};

/// Full-batch training, one update per epoch. Adam uses beta1 = 0.9,
/// beta2 = 0.999, eps = 1e-8 with bias correction.
TrainResult train_kafcm(KAFCMModel model, const SupervisedLayout& layout, const Dataset& train,
                        const TrainConfig& config);

struct PSOConfig {
  int swarm_size = 30;
  int iterations = 500;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::array<double, 2> weight_bounds{-1.0, 1.0};
  std::uint64_t seed = 0;

  void validate() const;
};

struct PSOResult {
  StandardFCM model;
  std::vector<double> history;  // best-so-far fitness after each iteration
};

/// Global-best PSO over the layout's input->output weights; every other
/// weight is left as given. Fitness is loss_rec of one-step predictions.
PSOResult pso_train_fcm(StandardFCM model, const SupervisedLayout& layout, const Dataset& train,
                        const PSOConfig& config);

// ---------------------------------------------------------------------------
// Grid search

enum class ErrorMetric { mse, mape };

struct GridSearchSpace {
  std::vector<int> grid_sizes;
  std::vector<double> learning_rates;
  std::vector<int> epoch_values;

  /// G in 4..19, eta in {0.001, 0.01, 0.05, 0.1}, ten epoch counts spread
  /// evenly over [500, 1500] and truncated to integers.
  static GridSearchSpace standard();
  std::size_t cell_count() const;
  void validate() const;
};

struct GridSearchRow {
  int grid_size = 0;
  double learning_rate = 0.0;
  int epochs = 0;
  double val_error = 0.0;
  bool ok = true;

  std::string key() const;
};

struct GridCorrelations {
  double grid_size = 0.0;
  double learning_rate = 0.0;
  double epochs = 0.0;
};

struct GridSearchReport {
  std::vector<GridSearchRow> rows;  // Cartesian order: G, then eta, then epochs
  std::optional<std::size_t> best;
  GridCorrelations correlations;
};

struct GridTask {
  /// Builds a freshly initialised model for grid size G.
  std::function<KAFCMModel(int grid_size, std::uint64_t seed)> make_model;
  SupervisedLayout layout;
  ErrorMetric metric = ErrorMetric::mse;
  double lambda = 0.0;
  Optimizer optimizer = Optimizer::adam;
};

std::uint64_t cell_seed(std::uint64_t base_seed, int grid_size, double learning_rate, int epochs);

/// Pearson correlation; 0 when either side has zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

double validation_error(ErrorMetric metric, const MatrixXd& pred, const MatrixXd& target);

struct GridSearchOptions {
  std::uint64_t base_seed = 0;
  int jobs = 1;
  /// Rows already computed (resumed run); matched by key() and not retrained.
  std::vector<GridSearchRow> completed;
  /// Called once per newly computed row, serialised across workers.
  std::function<void(const GridSearchRow&)> on_row;
};

GridSearchReport grid_search(const GridSearchSpace& space, const GridTask& task, const Dataset& train,
                             const Dataset& val, const GridSearchOptions& options = {});

/// Fills best and correlations from rows (failed rows excluded).
void summarize(GridSearchReport& report);

}  // namespace kafcm

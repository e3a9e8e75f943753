#pragma once

// Two-hidden-layer baseline: h1 = relu(W1 x + b1), h2 = relu(W2 h1 + b2),
// y = tanh(W3 h2 + b3), hidden width fixed at 64.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "kafcm/datagen.hpp"
#include "kafcm/training.hpp"

namespace kafcm {

inline constexpr int kMlpHidden = 64;

struct MLPParams {
  MatrixXd W1;
  VectorXd b1;
  MatrixXd W2;
  VectorXd b2;
  MatrixXd W3;
  VectorXd b3;

  int input_dim() const { return static_cast<int>(W1.cols()); }
  int output_dim() const { return static_cast<int>(W3.rows()); }
  bool finite() const;
  void validate() const;

  friend bool operator==(const MLPParams&, const MLPParams&) = default;
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
MLPParams init_mlp(int n_in, int n_out, std::uint64_t seed);
MLPParams zeros_like(const MLPParams& params);

VectorXd mlp_forward(const MLPParams& params, const VectorXd& x);
/// One sample per row.
MatrixXd mlp_forward(const MLPParams& params, const MatrixXd& inputs);

double mlp_loss(const MLPParams& params, const Dataset& data);
/// Gradient of the MSE loss, ReLU'(0) := 0.
MLPParams mlp_gradient(const MLPParams& params, const Dataset& data);

// Flat layout W1, b1, W2, b2, W3, b3 (column-major within each matrix).
VectorXd flatten(const MLPParams& params);
void unflatten(MLPParams& params, const VectorXd& theta);

struct MLPTrainResult {
  MLPParams params;
  std::vector<double> history;
  double final_loss = 0.0;
};

/// Full-batch training with the configured optimizer.
MLPTrainResult mlp_train(MLPParams params, const Dataset& train, const TrainConfig& config);

/// Recipe used for every experiment: eta = 0.05, 1500 epochs, plain GD.
TrainConfig mlp_default_config(std::uint64_t seed);

}  // namespace kafcm

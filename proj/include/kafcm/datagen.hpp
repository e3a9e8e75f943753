#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace kafcm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DatasetMetadata {
  std::string generator;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
};

/// Supervised pairs, one sample per row.
struct Dataset {
  MatrixXd inputs;
  MatrixXd targets;
  DatasetMetadata metadata;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
  Eigen::Index target_dim() const { return targets.cols(); }
};

struct MackeyGlassParams {
  double beta = 0.2;
  double gamma = 0.1;
  double exponent = 10.0;
  double delay = 17.0;
  double dt = 0.1;
  int total_steps = 2000;  // unit-time samples including washout
  int washout = 500;
  double x0 = 1.2;

  void validate() const;
};

// Two full periods of sin(3x); the experiment pipeline samples this wider
// range, the generator's own default is [-1, 1].
inline constexpr double kSineHalfWidth = 2.0 * std::numbers::pi / 3.0;

double yerkes_law(double x);

/// x ~ U[-1, 1] from Rng(seed); noise ~ N(0, noise_sd^2) from a second stream
/// derived from the seed, so the inputs do not depend on noise_sd.
Dataset gen_yerkes(int n, double noise_sd, std::uint64_t seed);

/// x ~ U[-half_width, half_width], y = sin(frequency x), noiseless.
Dataset gen_sine(int n, double frequency, std::uint64_t seed, double half_width = 1.0);

/// RK4 with the delayed term held constant over each step, history buffer
/// of delay/dt entries initialised to x0. Returns total_steps - washout
/// samples at unit time spacing.
std::vector<double> gen_mackey_glass(const MackeyGlassParams& params);

/// Mackey-Glass series embedded with `lag` predictors; the seed is recorded
/// in the metadata only (the integrator is deterministic).
Dataset gen_mackey_dataset(const MackeyGlassParams& params, int lag, std::uint64_t seed);

nlohmann::json mackey_params_to_json(const MackeyGlassParams& params);
MackeyGlassParams mackey_params_from_json(const nlohmann::json& j);

Dataset lag_embed(const std::vector<double>& series, int lag);

/// Largest-remainder split: sizes start at floor(f_i n) and leftover items go
/// one each to the parts with the largest fractional remainders (earlier part
/// wins ties). Unshuffled splits keep chronological order.
std::array<Dataset, 3> split_dataset(const Dataset& data, const std::array<double, 3>& fractions, bool shuffle,
                                     std::uint64_t seed);

std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const std::array<double, 3>& fractions);

/// Rebuilds a dataset from its metadata alone (generator, parameters, split).
Dataset regenerate(const DatasetMetadata& metadata);

/// Ground-truth targets with the generator's observation noise removed
/// (identical to `targets` for noiseless generators).
MatrixXd noiseless_targets(const Dataset& data);

}  // namespace kafcm

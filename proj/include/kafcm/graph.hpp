#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kafcm/edge.hpp"

namespace kafcm {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// smooth_clip(s) = logistic(8 (s - 0.5)), a differentiable stand-in for
// min(max(0, s), 1).
enum class BoundingOp { smooth_clip, tanh, identity };

inline constexpr double kSmoothClipSteepness = 8.0;

double bound(BoundingOp op, double s);
double bound_derivative(BoundingOp op, double s);

std::string_view to_string(BoundingOp op);
BoundingOp bounding_from_string(std::string_view name);
std::string_view to_string(BaseKind kind);
BaseKind base_kind_from_string(std::string_view name);

/// Functional-adjacency FCM. Edge (i, j) is the influence of source j on
/// target i; edges are stored row-major and only those with mask(i, j) set
/// contribute to the update.
struct KAFCMModel {
  int n_nodes = 0;
  std::shared_ptr<const KnotGrid<double>> grid;
  std::vector<EdgeFunction<double>> edges;
  MaskMatrix mask;
  BoundingOp bounding = BoundingOp::smooth_clip;

  EdgeFunction<double>& edge(int target, int source) { return edges[index(target, source)]; }
  const EdgeFunction<double>& edge(int target, int source) const { return edges[index(target, source)]; }
  std::size_t index(int target, int source) const {
    return static_cast<std::size_t>(target) * static_cast<std::size_t>(n_nodes) +
           static_cast<std::size_t>(source);
  }
  int present_edge_count() const { return static_cast<int>(mask.count()); }
};

/// Every edge initialized with init_edge under a seed derived from (seed, i, j).
KAFCMModel make_kafcm(int n_nodes, std::shared_ptr<const KnotGrid<double>> grid, MaskMatrix mask,
                      BoundingOp bounding, BaseKind base, std::uint64_t seed);

struct StandardFCM {
  MatrixXd weights;
  BoundingOp activation = BoundingOp::tanh;

  int n_nodes() const { return static_cast<int>(weights.rows()); }
};

struct Trajectory {
  std::vector<VectorXd> states;

  int length() const { return static_cast<int>(states.size()); }
};

/// Pre-bounding node input S_i = sum_j phi_ij(c_j) over present edges.
VectorXd kafcm_preactivation(const KAFCMModel& model, const VectorXd& state);
VectorXd kafcm_step(const KAFCMModel& model, const VectorXd& state);
VectorXd fcm_step(const StandardFCM& model, const VectorXd& state);

Trajectory simulate(const KAFCMModel& model, const VectorXd& c0, int steps);
Trajectory simulate(const StandardFCM& model, const VectorXd& c0, int steps);

}  // namespace kafcm

#include "kafcm/graph.hpp"

#include <cmath>

namespace kafcm {

double bound(BoundingOp op, double s) {
  switch (op) {
    case BoundingOp::smooth_clip: return sigmoid(kSmoothClipSteepness * (s - 0.5));
    case BoundingOp::tanh: return std::tanh(s);
    case BoundingOp::identity: return s;
  }
  return s;
}

double bound_derivative(BoundingOp op, double s) {
  switch (op) {
    case BoundingOp::smooth_clip: {
      const double y = sigmoid(kSmoothClipSteepness * (s - 0.5));
      return kSmoothClipSteepness * y * (1.0 - y);
    }
    case BoundingOp::tanh: {
      const double y = std::tanh(s);
      return 1.0 - y * y;
    }
    case BoundingOp::identity: return 1.0;
  }
  return 1.0;
}

std::string_view to_string(BoundingOp op) {
  switch (op) {
    case BoundingOp::smooth_clip: return "smooth_clip";
    case BoundingOp::tanh: return "tanh";
    case BoundingOp::identity: return "identity";
  }
  return "identity";
}

BoundingOp bounding_from_string(std::string_view name) {
  if (name == "smooth_clip") return BoundingOp::smooth_clip;
  if (name == "tanh") return BoundingOp::tanh;
  if (name == "identity") return BoundingOp::identity;
  throw Error(ErrorKind::invalid_config, "unknown bounding operator '" + std::string(name) + "'");
}

std::string_view to_string(BaseKind kind) { return kind == BaseKind::silu ? "silu" : "identity"; }

BaseKind base_kind_from_string(std::string_view name) {
  if (name == "silu") return BaseKind::silu;
  if (name == "identity") return BaseKind::identity;
  throw Error(ErrorKind::invalid_config, "unknown base kind '" + std::string(name) + "'");
}

KAFCMModel make_kafcm(int n_nodes, std::shared_ptr<const KnotGrid<double>> grid, MaskMatrix mask,
                      BoundingOp bounding, BaseKind base, std::uint64_t seed) {
  if (n_nodes < 1) throw Error(ErrorKind::invalid_config, "model needs at least one node");
  if (mask.rows() != n_nodes || mask.cols() != n_nodes)
    throw Error(ErrorKind::dimension_mismatch, "mask must be N x N");
  KAFCMModel model;
  model.n_nodes = n_nodes;
  model.grid = grid;
  model.mask = std::move(mask);
  model.bounding = bounding;
  model.edges.reserve(static_cast<std::size_t>(n_nodes) * n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    for (int j = 0; j < n_nodes; ++j)
      model.edges.push_back(init_edge(grid, base,
                                      derive_seed(seed, {static_cast<std::uint64_t>(i),
                                                         static_cast<std::uint64_t>(j)})));
  return model;
}

namespace {

void check_state(int n, const VectorXd& state) {
  if (state.size() != n)
    throw Error(ErrorKind::dimension_mismatch, "state has " + std::to_string(state.size()) +
                                                   " entries, model has " + std::to_string(n) + " nodes");
}

template <typename Model, typename Step>
Trajectory simulate_impl(const Model& model, int n, const VectorXd& c0, int steps, Step step) {
  if (steps < 1) throw Error(ErrorKind::invalid_config, "simulation needs T >= 1");
  check_state(n, c0);
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.push_back(c0);
  for (int t = 0; t < steps; ++t) {
    VectorXd next = step(model, traj.states.back());
    if (!next.allFinite())
      throw Error(ErrorKind::non_finite_state, "state became non-finite at step " + std::to_string(t + 1));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

}  // namespace

VectorXd kafcm_preactivation(const KAFCMModel& model, const VectorXd& state) {
  check_state(model.n_nodes, state);
  VectorXd s = VectorXd::Zero(model.n_nodes);
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j)
      if (model.mask(i, j)) s[i] += edge_eval(model.edge(i, j), state[j]);
  return s;
}

VectorXd kafcm_step(const KAFCMModel& model, const VectorXd& state) {
  return kafcm_preactivation(model, state).unaryExpr([&](double s) { return bound(model.bounding, s); });
}

VectorXd fcm_step(const StandardFCM& model, const VectorXd& state) {
  check_state(model.n_nodes(), state);
  const VectorXd s = model.weights * state;
  return s.unaryExpr([&](double v) { return bound(model.activation, v); });
}

Trajectory simulate(const KAFCMModel& model, const VectorXd& c0, int steps) {
  return simulate_impl(model, model.n_nodes, c0, steps,
                       [](const KAFCMModel& m, const VectorXd& c) { return kafcm_step(m, c); });
}

Trajectory simulate(const StandardFCM& model, const VectorXd& c0, int steps) {
  return simulate_impl(model, model.n_nodes(), c0, steps,
                       [](const StandardFCM& m, const VectorXd& c) { return fcm_step(m, c); });
}

}  // namespace kafcm

#include "kafcm/training.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "kafcm/rng.hpp"

namespace kafcm {

std::string_view to_string(Optimizer opt) { return opt == Optimizer::adam ? "adam" : "gd"; }

Optimizer optimizer_from_string(std::string_view name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "gd") return Optimizer::gd;
  throw Error(ErrorKind::invalid_config, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw Error(ErrorKind::invalid_config, "learning rate must be > 0");
  if (epochs < 1) throw Error(ErrorKind::invalid_config, "epochs must be >= 1");
  if (!(lambda >= 0)) throw Error(ErrorKind::invalid_config, "lambda must be >= 0");
}

// ---------------------------------------------------------------------------
// Layout and prediction

SupervisedLayout SupervisedLayout::feed_forward(int n_in, int n_out) {
  SupervisedLayout layout;
  for (int i = 0; i < n_in; ++i) layout.inputs.push_back(i);
  for (int o = 0; o < n_out; ++o) layout.outputs.push_back(n_in + o);
  return layout;
}

int SupervisedLayout::node_count() const {
  int n = 0;
  for (int i : inputs) n = std::max(n, i + 1);
  for (int o : outputs) n = std::max(n, o + 1);
  return n;
}

MaskMatrix SupervisedLayout::edge_mask(int n_nodes) const {
  MaskMatrix mask = MaskMatrix::Constant(n_nodes, n_nodes, false);
  for (int o : outputs)
    for (int i : inputs) mask(o, i) = true;
  return mask;
}

VectorXd SupervisedLayout::query_state(int n_nodes, const Eigen::Ref<const VectorXd>& input) const {
  if (input.size() != static_cast<Eigen::Index>(inputs.size()))
    throw Error(ErrorKind::dimension_mismatch, "input has " + std::to_string(input.size()) +
                                                   " values, layout expects " + std::to_string(inputs.size()));
  VectorXd state = VectorXd::Zero(n_nodes);
  for (std::size_t k = 0; k < inputs.size(); ++k) state[inputs[k]] = input[static_cast<Eigen::Index>(k)];
  return state;
}

namespace {

void check_layout(const SupervisedLayout& layout, int n_nodes, const MatrixXd& inputs) {
  if (layout.node_count() > n_nodes)
    throw Error(ErrorKind::dimension_mismatch, "layout refers to node " + std::to_string(layout.node_count() - 1) +
                                                   " of a " + std::to_string(n_nodes) + "-node model");
  if (inputs.cols() != static_cast<Eigen::Index>(layout.inputs.size()))
    throw Error(ErrorKind::dimension_mismatch, "data has " + std::to_string(inputs.cols()) +
                                                   " input columns, model expects " +
                                                   std::to_string(layout.inputs.size()));
}

void check_dataset(const SupervisedLayout& layout, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::empty_input, "dataset is empty");
  if (data.targets.cols() != static_cast<Eigen::Index>(layout.outputs.size()))
    throw Error(ErrorKind::dimension_mismatch, "data has " + std::to_string(data.targets.cols()) +
                                                   " target columns, model expects " +
                                                   std::to_string(layout.outputs.size()));
}

MatrixXd query_states(const SupervisedLayout& layout, int n_nodes, const MatrixXd& inputs) {
  MatrixXd q = MatrixXd::Zero(inputs.rows(), n_nodes);
  for (std::size_t k = 0; k < layout.inputs.size(); ++k)
    q.col(layout.inputs[k]) = inputs.col(static_cast<Eigen::Index>(k));
  return q;
}

}  // namespace

MatrixXd predict(const KAFCMModel& model, const SupervisedLayout& layout, const MatrixXd& inputs) {
  check_layout(layout, model.n_nodes, inputs);
  MatrixXd out(inputs.rows(), static_cast<Eigen::Index>(layout.outputs.size()));
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    const VectorXd next = kafcm_step(model, layout.query_state(model.n_nodes, inputs.row(t).transpose()));
    for (std::size_t o = 0; o < layout.outputs.size(); ++o)
      out(t, static_cast<Eigen::Index>(o)) = next[layout.outputs[o]];
  }
  return out;
}

MatrixXd predict(const StandardFCM& model, const SupervisedLayout& layout, const MatrixXd& inputs) {
  check_layout(layout, model.n_nodes(), inputs);
  const MatrixXd s = query_states(layout, model.n_nodes(), inputs) * model.weights.transpose();
  MatrixXd out(inputs.rows(), static_cast<Eigen::Index>(layout.outputs.size()));
  for (std::size_t o = 0; o < layout.outputs.size(); ++o)
    out.col(static_cast<Eigen::Index>(o)) =
        s.col(layout.outputs[o]).unaryExpr([&](double v) { return bound(model.activation, v); });
  return out;
}

// ---------------------------------------------------------------------------
// Losses

double loss_rec(const MatrixXd& pred, const MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw Error(ErrorKind::shape_mismatch, "prediction is " + std::to_string(pred.rows()) + "x" +
                                               std::to_string(pred.cols()) + ", target is " +
                                               std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
  if (pred.rows() == 0) throw Error(ErrorKind::empty_input, "loss over an empty sequence");
  return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

double loss_rec(const Trajectory& pred, const Trajectory& target) {
  if (pred.length() != target.length()) throw Error(ErrorKind::shape_mismatch, "trajectory lengths differ");
  if (pred.length() == 0) throw Error(ErrorKind::empty_input, "loss over an empty trajectory");
  const auto width = pred.states.front().size();
  MatrixXd p(pred.length(), width), t(target.length(), width);
  for (int k = 0; k < pred.length(); ++k) {
    if (pred.states[k].size() != width || target.states[k].size() != width)
      throw Error(ErrorKind::shape_mismatch, "trajectory state widths differ");
    p.row(k) = pred.states[k].transpose();
    t.row(k) = target.states[k].transpose();
  }
  return loss_rec(p, t);
}

double l1_penalty(const KAFCMModel& model) {
  double total = 0.0;
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j)
      if (model.mask(i, j)) total += model.edge(i, j).alpha.template lpNorm<1>();
  return total;
}

double loss_total(const KAFCMModel& model, const MatrixXd& pred, const MatrixXd& target, double lambda) {
  const double rec = loss_rec(pred, target);
  return lambda == 0.0 ? rec : rec + lambda * l1_penalty(model);
}

// ---------------------------------------------------------------------------
// Parameters

Eigen::Index parameter_count(const KAFCMModel& model) {
  return static_cast<Eigen::Index>(model.present_edge_count()) * (2 + model.grid->basis_count());
}

VectorXd parameter_vector(const KAFCMModel& model) {
  const Eigen::Index stride = 2 + model.grid->basis_count();
  VectorXd theta(parameter_count(model));
  Eigen::Index offset = 0;
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j) {
      if (!model.mask(i, j)) continue;
      const auto& e = model.edge(i, j);
      theta[offset] = e.w_base;
      theta[offset + 1] = e.w_spline;
      theta.segment(offset + 2, stride - 2) = e.alpha;
      offset += stride;
    }
  return theta;
}

void set_parameters(KAFCMModel& model, const VectorXd& theta) {
  if (theta.size() != parameter_count(model))
    throw Error(ErrorKind::dimension_mismatch, "parameter vector has the wrong length");
  const Eigen::Index stride = 2 + model.grid->basis_count();
  Eigen::Index offset = 0;
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j) {
      if (!model.mask(i, j)) continue;
      auto& e = model.edge(i, j);
      e.w_base = theta[offset];
      e.w_spline = theta[offset + 1];
      e.alpha = theta.segment(offset + 2, stride - 2);
      offset += stride;
    }
}

namespace {

double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void add_l1_subgradient(const KAFCMModel& model, double lambda, VectorXd& grad) {
  if (lambda == 0.0) return;
  const Eigen::Index stride = 2 + model.grid->basis_count();
  Eigen::Index offset = 0;
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j) {
      if (!model.mask(i, j)) continue;
      grad.segment(offset + 2, stride - 2) += lambda * model.edge(i, j).alpha.unaryExpr(&sign0);
      offset += stride;
    }
}

}  // namespace

VectorXd model_gradient(const KAFCMModel& model, const SupervisedLayout& layout, const Dataset& batch,
                        double lambda) {
  check_dataset(layout, batch);
  check_layout(layout, model.n_nodes, batch.inputs);
  const Eigen::Index stride = 2 + model.grid->basis_count();
  const double scale = 2.0 / static_cast<double>(batch.size());

  // parameter offset of each present edge
  std::vector<Eigen::Index> offsets(model.edges.size(), -1);
  Eigen::Index next = 0;
  for (int i = 0; i < model.n_nodes; ++i)
    for (int j = 0; j < model.n_nodes; ++j)
      if (model.mask(i, j)) {
        offsets[model.index(i, j)] = next;
        next += stride;
      }

  VectorXd grad = VectorXd::Zero(parameter_count(model));
  for (Eigen::Index t = 0; t < batch.size(); ++t) {
    const VectorXd state = layout.query_state(model.n_nodes, batch.inputs.row(t).transpose());
    const VectorXd s = kafcm_preactivation(model, state);
    for (std::size_t o = 0; o < layout.outputs.size(); ++o) {
      const int i = layout.outputs[o];
      const double residual = bound(model.bounding, s[i]) - batch.targets(t, static_cast<Eigen::Index>(o));
      const double upstream = scale * residual * bound_derivative(model.bounding, s[i]);
      for (int j = 0; j < model.n_nodes; ++j) {
        if (!model.mask(i, j)) continue;
        const auto g = edge_grad(model.edge(i, j), state[j], upstream);
        const Eigen::Index off = offsets[model.index(i, j)];
        grad[off] += g.d_w_base;
        grad[off + 1] += g.d_w_spline;
        grad.segment(off + 2, stride - 2) += g.d_alpha;
      }
    }
  }
  add_l1_subgradient(model, lambda, grad);
  if (!grad.allFinite()) throw Error(ErrorKind::non_finite_gradient, "gradient contains NaN or Inf");
  return grad;
}

// ---------------------------------------------------------------------------
// Gradient training

namespace {

// Basis values at the (fixed) training inputs, precomputed once per run.
class DesignCache {
 public:
  DesignCache(const KAFCMModel& model, const SupervisedLayout& layout, const Dataset& data)
      : samples_(data.size()), degree_(model.grid->degree), stride_(2 + model.grid->basis_count()) {
    const auto& grid = *model.grid;
    std::vector<int> input_pos(static_cast<std::size_t>(model.n_nodes), -1);
    for (std::size_t k = 0; k < layout.inputs.size(); ++k) input_pos[layout.inputs[k]] = static_cast<int>(k);

    Eigen::Index offset = 0;
    for (int i = 0; i < model.n_nodes; ++i)
      for (int j = 0; j < model.n_nodes; ++j) {
        if (!model.mask(i, j)) continue;
        const auto out = std::find(layout.outputs.begin(), layout.outputs.end(), i);
        if (out != layout.outputs.end()) {
          Slot slot;
          slot.edge = model.index(i, j);
          slot.output = static_cast<Eigen::Index>(out - layout.outputs.begin());
          slot.param_offset = offset;
          slot.first.resize(samples_);
          slot.basis.resize(samples_, degree_ + 1);
          slot.base.resize(samples_);
          const auto& edge = model.edge(i, j);
          for (Eigen::Index t = 0; t < samples_; ++t) {
            const double x = input_pos[j] >= 0 ? data.inputs(t, input_pos[j]) : 0.0;
            const int span = knot_span(grid, x);
            slot.first[t] = span - degree_;
            slot.basis.row(t) = local_basis(grid, span, degree_, clamp_to_domain(grid, x)).transpose();
            slot.base[t] = base_value(edge.base, x);
          }
          slots_.push_back(std::move(slot));
        }
        offset += stride_;
      }
  }

  // Writes the pre-activation (samples x outputs) for parameters theta.
  void forward(const VectorXd& theta, MatrixXd& preact) const {
    preact.setZero();
    for (const auto& slot : slots_) {
      const double wb = theta[slot.param_offset];
      const double ws = theta[slot.param_offset + 1];
      const auto alpha = theta.segment(slot.param_offset + 2, stride_ - 2);
      for (Eigen::Index t = 0; t < samples_; ++t) {
        const double spline = slot.basis.row(t).dot(alpha.segment(slot.first[t], degree_ + 1));
        preact(t, slot.output) += wb * slot.base[t] + ws * spline;
      }
    }
  }

  // Accumulates d loss_rec / d theta given upstream = dL/dS (samples x outputs).
  void backward(const VectorXd& theta, const MatrixXd& upstream, VectorXd& grad) const {
    grad.setZero();
    for (const auto& slot : slots_) {
      const double ws = theta[slot.param_offset + 1];
      const auto alpha = theta.segment(slot.param_offset + 2, stride_ - 2);
      double g_base = 0.0, g_spline = 0.0;
      for (Eigen::Index t = 0; t < samples_; ++t) {
        const double u = upstream(t, slot.output);
        if (u == 0.0) continue;
        const auto basis = slot.basis.row(t);
        g_base += u * slot.base[t];
        g_spline += u * basis.dot(alpha.segment(slot.first[t], degree_ + 1));
        grad.segment(slot.param_offset + 2 + slot.first[t], degree_ + 1) += (u * ws) * basis.transpose();
      }
      grad[slot.param_offset] += g_base;
      grad[slot.param_offset + 1] += g_spline;
    }
  }

 private:
  struct Slot {
    std::size_t edge = 0;
    Eigen::Index output = 0;
    Eigen::Index param_offset = 0;
    Eigen::VectorXi first;
    MatrixXd basis;
    VectorXd base;
  };

  Eigen::Index samples_;
  int degree_;
  Eigen::Index stride_;
  std::vector<Slot> slots_;
};

double l1_of(const VectorXd& theta, Eigen::Index stride) {
  double total = 0.0;
  for (Eigen::Index off = 0; off < theta.size(); off += stride)
    total += theta.segment(off + 2, stride - 2).lpNorm<1>();
  return total;
}

}  // namespace

TrainResult train_kafcm(KAFCMModel model, const SupervisedLayout& layout, const Dataset& train,
                        const TrainConfig& config) {
  config.validate();
  check_dataset(layout, train);
  check_layout(layout, model.n_nodes, train.inputs);

  const DesignCache cache(model, layout, train);
  const Eigen::Index stride = 2 + model.grid->basis_count();
  const double n = static_cast<double>(train.size());
  const auto op = model.bounding;

  VectorXd theta = parameter_vector(model);
  VectorXd grad(theta.size());
  VectorXd m = VectorXd::Zero(theta.size());
  VectorXd v = VectorXd::Zero(theta.size());
  MatrixXd preact(train.size(), train.target_dim());
  MatrixXd upstream(train.size(), train.target_dim());

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double beta1_pow = 1.0, beta2_pow = 1.0;

  auto evaluate = [&](double& loss) {
    cache.forward(theta, preact);
    const MatrixXd residual = preact.unaryExpr([op](double s) { return bound(op, s); }) - train.targets;
    loss = residual.squaredNorm() / n;
    if (config.lambda != 0.0) loss += config.lambda * l1_of(theta, stride);
    return residual;
  };

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = 0.0;
    const MatrixXd residual = evaluate(loss);
    if (!std::isfinite(loss) || !theta.allFinite()) throw DivergenceError(epoch, std::move(result.history));
    result.history.push_back(loss);

    upstream = (2.0 / n) * residual.cwiseProduct(preact.unaryExpr([op](double s) { return bound_derivative(op, s); }));
    cache.backward(theta, upstream, grad);
    if (config.lambda != 0.0)
      for (Eigen::Index off = 0; off < theta.size(); off += stride)
        grad.segment(off + 2, stride - 2) += config.lambda * theta.segment(off + 2, stride - 2).unaryExpr(&sign0);
    if (!grad.allFinite()) throw DivergenceError(epoch, std::move(result.history));

    if (config.optimizer == Optimizer::gd) {
      theta -= config.learning_rate * grad;
    } else {
      beta1_pow *= beta1;
      beta2_pow *= beta2;
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
      const double step = config.learning_rate / (1.0 - beta1_pow);
      const double vcorr = 1.0 / (1.0 - beta2_pow);
      theta.array() -= step * m.array() / ((v.array() * vcorr).sqrt() + eps);
    }
  }

  double final_loss = 0.0;
  evaluate(final_loss);
  if (!std::isfinite(final_loss) || !theta.allFinite())
    throw DivergenceError(config.epochs, std::move(result.history));
  set_parameters(model, theta);
  result.model = std::move(model);
  result.final_loss = final_loss;
  return result;
}

// ---------------------------------------------------------------------------
// PSO

void PSOConfig::validate() const {
  if (swarm_size < 2) throw Error(ErrorKind::invalid_config, "swarm size must be >= 2");
  if (iterations < 1) throw Error(ErrorKind::invalid_config, "iterations must be >= 1");
  if (!(weight_bounds[0] < weight_bounds[1])) throw Error(ErrorKind::invalid_config, "weight bounds need lo < hi");
}

PSOResult pso_train_fcm(StandardFCM model, const SupervisedLayout& layout, const Dataset& train,
                        const PSOConfig& config) {
  config.validate();
  check_dataset(layout, train);
  check_layout(layout, model.n_nodes(), train.inputs);

  std::vector<std::pair<int, int>> coords;
  for (int o : layout.outputs)
    for (int i : layout.inputs) coords.emplace_back(o, i);
  const auto dim = static_cast<Eigen::Index>(coords.size());
  const double lo = config.weight_bounds[0], hi = config.weight_bounds[1];
  const double vmax = hi - lo;

  const MatrixXd states = query_states(layout, model.n_nodes(), train.inputs);
  auto fitness = [&](const VectorXd& w) {
    for (Eigen::Index d = 0; d < dim; ++d) model.weights(coords[d].first, coords[d].second) = w[d];
    const MatrixXd s = states * model.weights.transpose();
    double total = 0.0;
    for (std::size_t o = 0; o < layout.outputs.size(); ++o)
      total += (s.col(layout.outputs[o]).unaryExpr([&](double x) { return bound(model.activation, x); }) -
                train.targets.col(static_cast<Eigen::Index>(o)))
                   .squaredNorm();
    return total / static_cast<double>(train.size());
  };

  Rng rng(config.seed);
  const auto swarm = static_cast<std::size_t>(config.swarm_size);
  std::vector<VectorXd> pos(swarm, VectorXd(dim)), vel(swarm, VectorXd(dim)), best_pos(swarm);
  std::vector<double> best_fit(swarm);
  VectorXd global_pos;
  double global_fit = std::numeric_limits<double>::infinity();

  for (std::size_t p = 0; p < swarm; ++p) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      pos[p][d] = rng.uniform(lo, hi);
      vel[p][d] = 0.1 * rng.uniform(-vmax, vmax);
    }
    best_pos[p] = pos[p];
    best_fit[p] = fitness(pos[p]);
    if (best_fit[p] < global_fit) {
      global_fit = best_fit[p];
      global_pos = pos[p];
    }
  }

  PSOResult result;
  result.history.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t p = 0; p < swarm; ++p) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        const double r1 = rng.uniform(), r2 = rng.uniform();
        double v = config.inertia * vel[p][d] + config.cognitive * r1 * (best_pos[p][d] - pos[p][d]) +
                   config.social * r2 * (global_pos[d] - pos[p][d]);
        v = std::clamp(v, -vmax, vmax);
        double x = pos[p][d] + v;
        if (x < lo || x > hi) {
          x = std::clamp(x, lo, hi);
          v = 0.0;
        }
        vel[p][d] = v;
        pos[p][d] = x;
      }
      const double f = fitness(pos[p]);
      if (f < best_fit[p]) {
        best_fit[p] = f;
        best_pos[p] = pos[p];
        if (f < global_fit) {
          global_fit = f;
          global_pos = pos[p];
        }
      }
    }
    result.history.push_back(global_fit);
  }

  for (Eigen::Index d = 0; d < dim; ++d) model.weights(coords[d].first, coords[d].second) = global_pos[d];
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------------------
// Grid search

GridSearchSpace GridSearchSpace::standard() {
  GridSearchSpace space;
  for (int g = 4; g <= 19; ++g) space.grid_sizes.push_back(g);
  space.learning_rates = {0.001, 0.01, 0.05, 0.1};
  for (int k = 0; k < 10; ++k) space.epoch_values.push_back(static_cast<int>(500.0 + k * (1000.0 / 9.0)));
  return space;
}

std::size_t GridSearchSpace::cell_count() const {
  return grid_sizes.size() * learning_rates.size() * epoch_values.size();
}

void GridSearchSpace::validate() const {
  if (grid_sizes.empty() || learning_rates.empty() || epoch_values.empty())
    throw Error(ErrorKind::invalid_config, "grid search space has an empty axis");
}

std::string GridSearchRow::key() const {
  std::ostringstream os;
  os << grid_size << '|' << std::bit_cast<std::uint64_t>(learning_rate) << '|' << epochs;
  return os.str();
}

std::uint64_t cell_seed(std::uint64_t base_seed, int grid_size, double learning_rate, int epochs) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(grid_size), std::bit_cast<std::uint64_t>(learning_rate),
                                 static_cast<std::uint64_t>(epochs)});
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double validation_error(ErrorMetric metric, const MatrixXd& pred, const MatrixXd& target) {
  if (metric == ErrorMetric::mse) return (pred - target).squaredNorm() / static_cast<double>(pred.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < pred.size(); ++k) {
    const double y = target.data()[k];
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    total += std::abs((y - pred.data()[k]) / y);
  }
  return 100.0 * total / static_cast<double>(pred.size());
}

void summarize(GridSearchReport& report) {
  report.best.reset();
  std::vector<double> gs, etas, eps, errs;
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    if (!row.ok) continue;
    if (!report.best || row.val_error < report.rows[*report.best].val_error) report.best = r;
    gs.push_back(row.grid_size);
    etas.push_back(row.learning_rate);
    eps.push_back(row.epochs);
    errs.push_back(row.val_error);
  }
  report.correlations = {pearson(gs, errs), pearson(etas, errs), pearson(eps, errs)};
}

GridSearchReport grid_search(const GridSearchSpace& space, const GridTask& task, const Dataset& train,
                             const Dataset& val, const GridSearchOptions& options) {
  space.validate();
  if (train.size() == 0 || val.size() == 0) throw Error(ErrorKind::empty_input, "grid search needs data");

  GridSearchReport report;
  for (int g : space.grid_sizes)
    for (double eta : space.learning_rates)
      for (int ep : space.epoch_values) report.rows.push_back({g, eta, ep, 0.0, true});

  std::unordered_map<std::string, GridSearchRow> done;
  for (const auto& row : options.completed) done.emplace(row.key(), row);

  std::vector<std::size_t> pending;
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    auto it = done.find(report.rows[r].key());
    if (it != done.end())
      report.rows[r] = it->second;
    else
      pending.push_back(r);
  }

  std::atomic<std::size_t> cursor{0};
  std::mutex callback_mutex;
  std::exception_ptr failure;
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (std::size_t k = cursor++; k < pending.size(); k = cursor++) {
      if (stop) return;
      auto& row = report.rows[pending[k]];
      const std::uint64_t seed = cell_seed(options.base_seed, row.grid_size, row.learning_rate, row.epochs);
      TrainConfig config{row.learning_rate, row.epochs, task.lambda, seed, task.optimizer};
      try {
        auto trained = train_kafcm(task.make_model(row.grid_size, seed), task.layout, train, config);
        row.val_error = validation_error(task.metric, predict(trained.model, task.layout, val.inputs), val.targets);
        row.ok = std::isfinite(row.val_error);
      } catch (const DivergenceError&) {
        row.val_error = std::numeric_limits<double>::quiet_NaN();
        row.ok = false;
      } catch (...) {
        std::lock_guard lock(callback_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
      if (options.on_row) {
        std::lock_guard lock(callback_mutex);
        options.on_row(row);
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(pending.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  summarize(report);
  return report;
}

}  // namespace kafcm

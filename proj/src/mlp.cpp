#include "kafcm/mlp.hpp"

#include <cmath>

#include "kafcm/rng.hpp"

namespace kafcm {

namespace {

void fill_uniform(Rng& rng, double bound, MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
}

void fill_uniform(Rng& rng, double bound, VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.uniform(-bound, bound);
}

struct Activations {
  MatrixXd z1, h1, z2, h2, z3, y;  // one sample per column
};

Activations forward_all(const MLPParams& p, const MatrixXd& inputs) {
  Activations a;
  a.z1 = (p.W1 * inputs.transpose()).colwise() + p.b1;
  a.h1 = a.z1.cwiseMax(0.0);
  a.z2 = (p.W2 * a.h1).colwise() + p.b2;
  a.h2 = a.z2.cwiseMax(0.0);
  a.z3 = (p.W3 * a.h2).colwise() + p.b3;
  a.y = a.z3.array().tanh();
  return a;
}

MatrixXd relu_mask(const MatrixXd& z) { return (z.array() > 0.0).cast<double>(); }

}  // namespace

bool MLPParams::finite() const {
  return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite() && W3.allFinite() &&
         b3.allFinite();
}

void MLPParams::validate() const {
  const auto h = kMlpHidden;
  if (W1.rows() != h || b1.size() != h || W2.rows() != h || W2.cols() != h || b2.size() != h || W3.cols() != h ||
      b3.size() != W3.rows() || W1.cols() < 1 || W3.rows() < 1)
    throw Error(ErrorKind::dimension_mismatch, "MLP parameter shapes do not match the 64-unit architecture");
}

MLPParams init_mlp(int n_in, int n_out, std::uint64_t seed) {
  if (n_in < 1 || n_out < 1) throw Error(ErrorKind::invalid_config, "MLP needs n_in, n_out >= 1");
  Rng rng(seed);
  MLPParams p;
  p.W1.resize(kMlpHidden, n_in);
  p.b1.resize(kMlpHidden);
  p.W2.resize(kMlpHidden, kMlpHidden);
  p.b2.resize(kMlpHidden);
  p.W3.resize(n_out, kMlpHidden);
  p.b3.resize(n_out);
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(n_in));
  const double hid_bound = 1.0 / std::sqrt(static_cast<double>(kMlpHidden));
  fill_uniform(rng, in_bound, p.W1);
  fill_uniform(rng, in_bound, p.b1);
  fill_uniform(rng, hid_bound, p.W2);
  fill_uniform(rng, hid_bound, p.b2);
  fill_uniform(rng, hid_bound, p.W3);
  fill_uniform(rng, hid_bound, p.b3);
  return p;
}

MLPParams zeros_like(const MLPParams& p) {
  return {MatrixXd::Zero(p.W1.rows(), p.W1.cols()), VectorXd::Zero(p.b1.size()),
          MatrixXd::Zero(p.W2.rows(), p.W2.cols()), VectorXd::Zero(p.b2.size()),
          MatrixXd::Zero(p.W3.rows(), p.W3.cols()), VectorXd::Zero(p.b3.size())};
}

VectorXd mlp_forward(const MLPParams& p, const VectorXd& x) {
  if (x.size() != p.input_dim())
    throw Error(ErrorKind::dimension_mismatch, "MLP expects " + std::to_string(p.input_dim()) + " inputs, got " +
                                                   std::to_string(x.size()));
  const VectorXd h1 = (p.W1 * x + p.b1).cwiseMax(0.0);
  const VectorXd h2 = (p.W2 * h1 + p.b2).cwiseMax(0.0);
  return (p.W3 * h2 + p.b3).array().tanh();
}

MatrixXd mlp_forward(const MLPParams& p, const MatrixXd& inputs) {
  if (inputs.cols() != p.input_dim())
    throw Error(ErrorKind::dimension_mismatch, "MLP expects " + std::to_string(p.input_dim()) +
                                                   " input columns, got " + std::to_string(inputs.cols()));
  return forward_all(p, inputs).y.transpose();
}

double mlp_loss(const MLPParams& p, const Dataset& data) {
  return loss_rec(mlp_forward(p, data.inputs), data.targets);
}

MLPParams mlp_gradient(const MLPParams& p, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::empty_input, "dataset is empty");
  if (data.target_dim() != p.output_dim())
    throw Error(ErrorKind::dimension_mismatch, "MLP output width does not match the targets");
  const Activations a = forward_all(p, data.inputs);
  const double scale = 2.0 / static_cast<double>(data.size());

  const MatrixXd d3 = (scale * (a.y - data.targets.transpose())).cwiseProduct(
      (1.0 - a.y.array().square()).matrix());
  const MatrixXd d2 = (p.W3.transpose() * d3).cwiseProduct(relu_mask(a.z2));
  const MatrixXd d1 = (p.W2.transpose() * d2).cwiseProduct(relu_mask(a.z1));

  MLPParams g;
  g.W3 = d3 * a.h2.transpose();
  g.b3 = d3.rowwise().sum();
  g.W2 = d2 * a.h1.transpose();
  g.b2 = d2.rowwise().sum();
  g.W1 = d1 * data.inputs;
  g.b1 = d1.rowwise().sum();
  return g;
}

VectorXd flatten(const MLPParams& p) {
  VectorXd theta(p.W1.size() + p.b1.size() + p.W2.size() + p.b2.size() + p.W3.size() + p.b3.size());
  Eigen::Index off = 0;
  auto put = [&](const auto& m) {
    theta.segment(off, m.size()) = Eigen::Map<const VectorXd>(m.data(), m.size());
    off += m.size();
  };
  put(p.W1);
  put(p.b1);
  put(p.W2);
  put(p.b2);
  put(p.W3);
  put(p.b3);
  return theta;
}

void unflatten(MLPParams& p, const VectorXd& theta) {
  Eigen::Index off = 0;
  auto take = [&](auto& m) {
    Eigen::Map<VectorXd>(m.data(), m.size()) = theta.segment(off, m.size());
    off += m.size();
  };
  take(p.W1);
  take(p.b1);
  take(p.W2);
  take(p.b2);
  take(p.W3);
  take(p.b3);
}

MLPTrainResult mlp_train(MLPParams params, const Dataset& train, const TrainConfig& config) {
  config.validate();
  params.validate();
  if (train.input_dim() != params.input_dim())
    throw Error(ErrorKind::dimension_mismatch, "MLP input width does not match the data");

  VectorXd theta = flatten(params);
  VectorXd m = VectorXd::Zero(theta.size()), v = VectorXd::Zero(theta.size());
  double beta1_pow = 1.0, beta2_pow = 1.0;

  MLPTrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = mlp_loss(params, train);
    if (!std::isfinite(loss) || !params.finite()) throw DivergenceError(epoch, std::move(result.history));
    result.history.push_back(loss);
    const VectorXd grad = flatten(mlp_gradient(params, train));
    if (config.optimizer == Optimizer::gd) {
      theta -= config.learning_rate * grad;
    } else {
      beta1_pow *= 0.9;
      beta2_pow *= 0.999;
      m = 0.9 * m + 0.1 * grad;
      v = 0.999 * v + 0.001 * grad.cwiseAbs2();
      theta.array() -= (config.learning_rate / (1.0 - beta1_pow)) * m.array() /
                       ((v.array() / (1.0 - beta2_pow)).sqrt() + 1e-8);
    }
    unflatten(params, theta);
  }
  result.final_loss = mlp_loss(params, train);
  if (!std::isfinite(result.final_loss)) throw DivergenceError(config.epochs, std::move(result.history));
  result.params = std::move(params);
  return result;
}

TrainConfig mlp_default_config(std::uint64_t seed) { return {0.05, 1500, 0.0, seed, Optimizer::gd}; }

}  // namespace kafcm

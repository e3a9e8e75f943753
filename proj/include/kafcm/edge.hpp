#pragma once

// Learnable univariate edge: phi(x) = w_base * b(x) + w_spline * sum_k alpha_k B_k(x).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>

#include "kafcm/rng.hpp"
#include "kafcm/spline.hpp"

namespace kafcm {

enum class BaseKind { silu, identity };

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar silu(Scalar x) {
  return x * sigmoid(x);
}

template <typename Scalar>
Scalar silu_derivative(Scalar x) {
  const Scalar s = sigmoid(x);
  return s * (Scalar(1) + x * (Scalar(1) - s));
}

template <typename Scalar>
Scalar base_value(BaseKind kind, Scalar x) {
  return kind == BaseKind::silu ? silu(x) : x;
}

template <typename Scalar>
Scalar base_derivative(BaseKind kind, Scalar x) {
  return kind == BaseKind::silu ? silu_derivative(x) : Scalar(1);
}

template <typename Scalar = double>
struct EdgeFunction {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar w_base{1};
  Scalar w_spline{1};
  Vector alpha;
  std::shared_ptr<const KnotGrid<Scalar>> grid;
  BaseKind base = BaseKind::silu;

  bool finite() const {
    return std::isfinite(w_base) && std::isfinite(w_spline) && alpha.allFinite();
  }
};

template <typename Scalar = double>
struct EdgeGradient {
  Scalar d_w_base{0};
  Scalar d_w_spline{0};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_alpha;
  Scalar d_input{0};
};

/// Base path sees the raw input; the spline path sees the input clamped to
/// the grid domain.
template <typename Scalar>
Scalar edge_eval(const EdgeFunction<Scalar>& edge, Scalar x) {
  const auto& grid = *edge.grid;
  const int span = knot_span(grid, x);
  const auto local = local_basis(grid, span, grid.degree, clamp_to_domain(grid, x));
  const Scalar spline = edge.alpha.segment(span - grid.degree, grid.degree + 1).dot(local);
  return edge.w_base * base_value(edge.base, x) + edge.w_spline * spline;
}

/// Exact partials of upstream * phi(x) with respect to the edge parameters
/// and the input. The spline contributes nothing to d_input outside the
/// grid domain.
template <typename Scalar>
EdgeGradient<Scalar> edge_grad(const EdgeFunction<Scalar>& edge, Scalar x, Scalar upstream) {
  const auto& grid = *edge.grid;
  const int p = grid.degree;
  const Scalar xc = clamp_to_domain(grid, x);
  const int span = knot_span(grid, xc);
  const auto local = local_basis(grid, span, p, xc);
  const auto coeffs = edge.alpha.segment(span - p, p + 1);

  EdgeGradient<Scalar> g;
  g.d_w_base = upstream * base_value(edge.base, x);
  g.d_w_spline = upstream * coeffs.dot(local);
  g.d_alpha = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(grid.basis_count());
  g.d_alpha.segment(span - p, p + 1) = (upstream * edge.w_spline) * local;

  Scalar slope = edge.w_base * base_derivative(edge.base, x);
  const bool outside = x < grid.domain_lo || x > grid.domain_hi;
  if (p >= 1 && !outside) slope += edge.w_spline * coeffs.dot(local_basis_derivative(grid, span, xc));
  g.d_input = upstream * slope;
  return g;
}

/// w_base = w_spline = 1, alpha ~ U[-0.1, 0.1] drawn from Rng(seed).
template <typename Scalar>
EdgeFunction<Scalar> init_edge(std::shared_ptr<const KnotGrid<Scalar>> grid, BaseKind base,
                               std::uint64_t seed) {
  EdgeFunction<Scalar> edge;
  edge.base = base;
  edge.alpha.resize(grid->basis_count());
  Rng rng(seed);
  for (Eigen::Index k = 0; k < edge.alpha.size(); ++k) edge.alpha[k] = Scalar(rng.uniform(-0.1, 0.1));
  edge.grid = std::move(grid);
  return edge;
}

}  // namespace kafcm

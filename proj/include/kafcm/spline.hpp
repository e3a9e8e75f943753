#pragma once

// Uniform knot grids and B-spline bases (Cox-de Boor).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "kafcm/error.hpp"

namespace kafcm {

/// Uniform partition of [domain_lo, domain_hi] into `grid_size` intervals,
/// extended by `degree` equally spaced knots past each end.
///
/// knots[degree] == domain_lo and knots[degree + grid_size] == domain_hi hold
/// exactly; basis_count() == grid_size + degree.
template <typename Scalar = double>
struct KnotGrid {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar domain_lo{};
  Scalar domain_hi{};
  int grid_size = 0;
  int degree = 0;
  Vector knots;

  int basis_count() const { return grid_size + degree; }
  Scalar spacing() const { return (domain_hi - domain_lo) / Scalar(grid_size); }

  friend bool operator==(const KnotGrid& a, const KnotGrid& b) {
    return a.domain_lo == b.domain_lo && a.domain_hi == b.domain_hi &&
           a.grid_size == b.grid_size && a.degree == b.degree && a.knots == b.knots;
  }
};

template <typename Scalar = double>
KnotGrid<Scalar> make_uniform_grid(Scalar domain_lo, Scalar domain_hi, int grid_size, int degree) {
  if (!(domain_lo < domain_hi))
    throw Error(ErrorKind::invalid_domain, "domain_lo must be < domain_hi");
  if (grid_size < 1) throw Error(ErrorKind::zero_grid, "grid size must be >= 1");
  if (degree < 0) throw Error(ErrorKind::invalid_config, "degree must be >= 0");

  KnotGrid<Scalar> grid;
  grid.domain_lo = domain_lo;
  grid.domain_hi = domain_hi;
  grid.grid_size = grid_size;
  grid.degree = degree;

  const Scalar h = grid.spacing();
  const int count = grid_size + 2 * degree + 1;
  grid.knots.resize(count);
  for (int i = 0; i < count; ++i) {
    const int offset = i - degree;
    if (offset <= grid_size / 2)
      grid.knots[i] = domain_lo + Scalar(offset) * h;
    else
      grid.knots[i] = domain_hi - Scalar(grid_size - offset) * h;
  }
  grid.knots[degree] = domain_lo;
  grid.knots[degree + grid_size] = domain_hi;
  return grid;
}

namespace detail {

template <typename Scalar>
Scalar safe_ratio(Scalar num, Scalar den) {
  return den == Scalar(0) ? Scalar(0) : num / den;
}

}  // namespace detail

/// B_{k,q}(x) by direct Cox-de Boor recursion over `grid.knots`.
///
/// Uses the half-open degree-0 indicator [t_k, t_{k+1}) and 0/0 := 0. No
/// clamping is applied; `degree` may differ from grid.degree.
template <typename Scalar>
Scalar basis_value(const KnotGrid<Scalar>& grid, int k, int degree, Scalar x) {
  const auto& t = grid.knots;
  const int count = static_cast<int>(t.size()) - degree - 1;
  if (degree < 0 || k < 0 || k >= count)
    throw Error(ErrorKind::index_out_of_range,
                "basis index " + std::to_string(k) + " of degree " + std::to_string(degree));
  if (degree == 0) return (t[k] <= x && x < t[k + 1]) ? Scalar(1) : Scalar(0);
  if (x < t[k] || x >= t[k + degree + 1]) return Scalar(0);
  const Scalar left = detail::safe_ratio(x - t[k], t[k + degree] - t[k]);
  const Scalar right = detail::safe_ratio(t[k + degree + 1] - x, t[k + degree + 1] - t[k + 1]);
  return left * basis_value(grid, k, degree - 1, x) + right * basis_value(grid, k + 1, degree - 1, x);
}

template <typename Scalar>
Scalar clamp_to_domain(const KnotGrid<Scalar>& grid, Scalar x) {
  return std::clamp(x, grid.domain_lo, grid.domain_hi);
}

/// Knot interval index i (grid.degree <= i < grid.degree + grid_size) with
/// t_i <= x < t_{i+1} for the clamped x. The right domain end maps to the
/// last interior interval, i.e. it is evaluated as a left limit.
template <typename Scalar>
int knot_span(const KnotGrid<Scalar>& grid, Scalar x) {
  const Scalar xc = clamp_to_domain(grid, x);
  const int first = grid.degree;
  const int last = grid.degree + grid.grid_size - 1;
  const auto& t = grid.knots;
  auto it = std::upper_bound(t.data() + first, t.data() + last + 1, xc);
  return std::clamp(static_cast<int>(it - t.data()) - 1, first, last);
}

/// The q+1 degree-q basis values that can be nonzero on interval `span`,
/// i.e. B_{span-q..span, q}(x), built with the triangular Cox-de Boor scheme.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> local_basis(const KnotGrid<Scalar>& grid, int span, int degree,
                                                     Scalar x) {
  const auto& t = grid.knots;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> n(degree + 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> left(degree + 1), right(degree + 1);
  n[0] = Scalar(1);
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    Scalar saved(0);
    for (int r = 0; r < j; ++r) {
      const Scalar tmp = detail::safe_ratio(n[r], right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  return n;
}

/// All grid.basis_count() bases of degree grid.degree at clamp(x).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> basis_vector(const KnotGrid<Scalar>& grid, Scalar x) {
  const Scalar xc = clamp_to_domain(grid, x);
  const int span = knot_span(grid, xc);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(grid.basis_count());
  out.segment(span - grid.degree, grid.degree + 1) = local_basis(grid, span, grid.degree, xc);
  return out;
}

/// Nonzero derivative entries on `span`: dB_{span-p..span, p}/dx at x.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> local_basis_derivative(const KnotGrid<Scalar>& grid, int span,
                                                                Scalar x) {
  const int p = grid.degree;
  const auto& t = grid.knots;
  // lower[r] = B_{span-p+1+r, p-1}(x), r = 0..p-1
  const auto lower = local_basis(grid, span, p - 1, x);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d(p + 1);
  for (int r = 0; r <= p; ++r) {
    const int k = span - p + r;
    const Scalar below = r >= 1 ? lower[r - 1] : Scalar(0);  // B_{k, p-1}
    const Scalar above = r <= p - 1 ? lower[r] : Scalar(0);  // B_{k+1, p-1}
    d[r] = detail::safe_ratio(Scalar(p), t[k + p] - t[k]) * below -
           detail::safe_ratio(Scalar(p), t[k + p + 1] - t[k + 1]) * above;
  }
  return d;
}

/// dB_{k,p}/dx for every basis at clamp(x). On the domain boundary and
/// beyond, this is the one-sided limit from inside the domain.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> basis_derivative_vector(const KnotGrid<Scalar>& grid, Scalar x) {
  if (grid.degree < 1)
    throw Error(ErrorKind::degree_zero, "basis derivative requires degree >= 1");
  const Scalar xc = clamp_to_domain(grid, x);
  const int span = knot_span(grid, xc);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(grid.basis_count());
  out.segment(span - grid.degree, grid.degree + 1) = local_basis_derivative(grid, span, xc);
  return out;
}

}  // namespace kafcm

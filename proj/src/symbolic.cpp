#include "kafcm/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "kafcm/error.hpp"

namespace kafcm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(CandidateForm form) {
  switch (form) {
    case CandidateForm::sinusoid: return "sinusoid";
    case CandidateForm::gaussian: return "gaussian";
    case CandidateForm::polynomial: return "polynomial";
    case CandidateForm::affine: return "affine";
  }
  return "affine";
}

EdgeCurve sample_edge(const EdgeFunction<double>& edge, int n, int target, int source) {
  if (n < 2) throw Error(ErrorKind::invalid_config, "need at least 2 samples");
  const double lo = edge.grid->domain_lo, hi = edge.grid->domain_hi;
  EdgeCurve curve;
  curve.target = target;
  curve.source = source;
  curve.xs.resize(n);
  curve.ys.resize(n);
  for (int i = 0; i < n; ++i) {
    curve.xs[i] = i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    curve.ys[i] = edge_eval(edge, curve.xs[i]);
  }
  return curve;
}

double evaluate(const CandidateFit& fit, double x) {
  const auto& c = fit.coefficients;
  switch (fit.form) {
    case CandidateForm::sinusoid: return c[0] * std::sin(c[1] * x + c[2]) + c[3];
    case CandidateForm::gaussian: return c[0] * std::exp(-c[1] * x * x) + c[2];
    case CandidateForm::affine: return c[0] * x + c[1];
    case CandidateForm::polynomial: {
      double y = 0.0;
      for (Eigen::Index k = c.size() - 1; k >= 0; --k) y = y * x + c[k];
      return y;
    }
  }
  return 0.0;
}

namespace {

struct LinearFit {
  VectorXd coef;
  double sse = 0.0;
};

LinearFit least_squares(const MatrixXd& design, const VectorXd& y) {
  LinearFit fit;
  fit.coef = design.colPivHouseholderQr().solve(y);
  fit.sse = (design * fit.coef - y).squaredNorm();
  return fit;
}

MatrixXd sinusoid_design(const VectorXd& x, double b) {
  MatrixXd d(x.size(), 3);
  d.col(0) = (b * x.array()).sin();
  d.col(1) = (b * x.array()).cos();
  d.col(2).setOnes();
  return d;
}

MatrixXd gaussian_design(const VectorXd& x, double b) {
  MatrixXd d(x.size(), 2);
  d.col(0) = (-b * x.array().square()).exp();
  d.col(1).setOnes();
  return d;
}

// Scan b over kScanPoints points in (0, kScanMax], then golden-section search
// on the bracket around the best scan point.
double scan_nonlinear(const std::function<double(double)>& sse) {
  const double step = kScanMax / kScanPoints;
  int best = 1;
  double best_sse = sse(step);
  for (int k = 2; k <= kScanPoints; ++k) {
    const double v = sse(k * step);
    if (v < best_sse) {
      best_sse = v;
      best = k;
    }
  }
  double a = std::max((best - 1) * step, 1e-9);
  double b = std::min((best + 1) * step, kScanMax);
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = sse(c), fd = sse(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sse(d);
    }
  }
  const double refined = 0.5 * (a + b);
  return sse(refined) <= best_sse ? refined : best * step;
}

CandidateFit finish(CandidateForm form, VectorXd coef, double sse, double sst) {
  CandidateFit fit;
  fit.form = form;
  fit.r_squared = 1.0 - sse / sst;
  fit.score = fit.r_squared - kComplexityPenalty * static_cast<double>(coef.size());
  fit.coefficients = std::move(coef);
  return fit;
}

}  // namespace

std::vector<CandidateFit> fit_candidates(const EdgeCurve& curve) {
  const VectorXd& x = curve.xs;
  const VectorXd& y = curve.ys;
  if (x.size() != y.size()) throw Error(ErrorKind::shape_mismatch, "curve xs and ys differ in length");
  if (x.size() < 10) throw Error(ErrorKind::invalid_config, "need at least 10 curve points");
  if (!(x.maxCoeff() > x.minCoeff())) throw Error(ErrorKind::invalid_config, "curve xs have zero span");

  const Eigen::Index n = x.size();
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst == 0.0) {
    CandidateFit flat;
    flat.form = CandidateForm::affine;
    flat.coefficients = (VectorXd(2) << 0.0, y[0]).finished();
    flat.r_squared = 1.0;
    flat.score = 1.0 - 2 * kComplexityPenalty;
    return {flat};
  }

  std::vector<CandidateFit> fits;

  {
    MatrixXd d(n, 2);
    d.col(0) = x;
    d.col(1).setOnes();
    const auto lf = least_squares(d, y);
    fits.push_back(finish(CandidateForm::affine, lf.coef, lf.sse, sst));
  }

  {
    std::optional<CandidateFit> best;
    for (int degree = 2; degree <= 5; ++degree) {
      MatrixXd d(n, degree + 1);
      d.col(0).setOnes();
      for (int k = 1; k <= degree; ++k) d.col(k) = d.col(k - 1).cwiseProduct(x);
      const auto lf = least_squares(d, y);
      auto fit = finish(CandidateForm::polynomial, lf.coef, lf.sse, sst);
      if (!best || fit.score > best->score) best = std::move(fit);
    }
    fits.push_back(std::move(*best));
  }

  {
    const double b = scan_nonlinear([&](double bb) { return least_squares(gaussian_design(x, bb), y).sse; });
    const auto lf = least_squares(gaussian_design(x, b), y);
    fits.push_back(finish(CandidateForm::gaussian, (VectorXd(3) << lf.coef[0], b, lf.coef[1]).finished(), lf.sse, sst));
  }

  {
    const double b = scan_nonlinear([&](double bb) { return least_squares(sinusoid_design(x, bb), y).sse; });
    const auto lf = least_squares(sinusoid_design(x, b), y);
    // A sin(bx) + B cos(bx) = a sin(bx + c)
    const double a = std::hypot(lf.coef[0], lf.coef[1]);
    const double c = std::atan2(lf.coef[1], lf.coef[0]);
    fits.push_back(finish(CandidateForm::sinusoid, (VectorXd(4) << a, b, c, lf.coef[2]).finished(), lf.sse, sst));
  }

  std::sort(fits.begin(), fits.end(), [](const CandidateFit& l, const CandidateFit& r) {
    if (l.score != r.score) return l.score > r.score;
    return to_string(l.form) < to_string(r.form);
  });
  return fits;
}

}  // namespace kafcm

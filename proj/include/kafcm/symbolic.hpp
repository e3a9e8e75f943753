#pragma once

// Closed-form recovery of a learned edge law from its sampled curve.

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "kafcm/edge.hpp"

namespace kafcm {

struct EdgeCurve {
  Eigen::VectorXd xs;
  Eigen::VectorXd ys;
  int target = -1;
  int source = -1;
};

/// n evenly spaced samples of the edge over its grid domain, endpoints included.
EdgeCurve sample_edge(const EdgeFunction<double>& edge, int n, int target = -1, int source = -1);

// Coefficient order per form:
//   sinusoid    a sin(b x + c) + d        -> [a, b, c, d], a >= 0
//   gaussian    a exp(-b x^2) + c         -> [a, b, c]
//   polynomial  sum_k c_k x^k, degree 2-5 -> [c_0, ..., c_d]
//   affine      a x + b                   -> [a, b]
enum class CandidateForm { sinusoid, gaussian, polynomial, affine };

std::string_view to_string(CandidateForm form);

struct CandidateFit {
  CandidateForm form = CandidateForm::affine;
  Eigen::VectorXd coefficients;
  double r_squared = 0.0;
  double score = 0.0;
};

inline constexpr double kComplexityPenalty = 0.001;
inline constexpr int kScanPoints = 200;
inline constexpr double kScanMax = 10.0;

double evaluate(const CandidateFit& fit, double x);

/// One fit per form, best score first (ties broken by form name). A curve
/// with zero variance yields a single affine fit with slope 0 and r^2 = 1.
std::vector<CandidateFit> fit_candidates(const EdgeCurve& curve);

}  // namespace kafcm

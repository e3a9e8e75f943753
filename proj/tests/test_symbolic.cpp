#include <doctest.h>

#include <functional>

#include "kafcm/error.hpp"
#include "kafcm/symbolic.hpp"
#include "support.hpp"

using namespace kafcm;
using Eigen::VectorXd;

namespace {

EdgeCurve curve_of(const std::function<double(double)>& f, double lo, double hi, int n) {
  EdgeCurve c;
  c.xs = VectorXd::LinSpaced(n, lo, hi);
  c.ys = c.xs.unaryExpr(f);
  return c;
}

void check_recovers(CandidateForm form, const VectorXd& coef, double lo, double hi) {
  CandidateFit truth{form, coef, 1.0, 0.0};
  const auto fits = fit_candidates(curve_of([&](double x) { return evaluate(truth, x); }, lo, hi, 200));
  REQUIRE(!fits.empty());
  CAPTURE(to_string(form));
  CHECK(fits.front().form == form);
  CHECK(fits.front().r_squared >= 1 - 1e-8);
  REQUIRE(fits.front().coefficients.size() == coef.size());
  for (Eigen::Index i = 0; i < coef.size(); ++i)
    CHECK(test_support::close(fits.front().coefficients[i], coef[i], 1e-3, 1e-9));
}

}  // namespace

TEST_SUITE("symbolic") {
  TEST_CASE("sampling an edge") {
    const auto grid = test_support::shared_grid(-1, 1, 5, 3);
    auto e = init_edge(grid, BaseKind::silu, 3);
    const auto two = sample_edge(e, 2, 1, 0);
    REQUIRE(two.xs.size() == 2);
    CHECK(two.xs[0] == -1.0);
    CHECK(two.xs[1] == 1.0);
    CHECK(two.target == 1);
    CHECK(two.source == 0);

    auto zero = e;
    zero.w_base = 0;
    zero.w_spline = 0;
    zero.alpha.setZero();
    CHECK(sample_edge(zero, 50).ys.isZero(0.0));

    e.alpha.setZero();
    const auto c = sample_edge(e, 101);
    for (Eigen::Index i = 0; i < c.xs.size(); ++i) {
      CHECK(c.ys[i] == silu(c.xs[i]));
      if (i) CHECK(c.xs[i] > c.xs[i - 1]);
    }
    CHECK_THROWS_AS(sample_edge(e, 1), Error);
  }

  TEST_CASE("sin(3x) is recovered") {
    const auto fits = fit_candidates(curve_of([](double x) { return std::sin(3 * x); }, -1, 1, 200));
    REQUIRE(fits.size() == 4);
    CHECK(fits.front().form == CandidateForm::sinusoid);
    CHECK(std::abs(fits.front().coefficients[1] - 3.0) <= 0.05);
    CHECK(fits.front().r_squared >= 0.999);
    for (std::size_t i = 1; i < fits.size(); ++i) CHECK(fits[i - 1].score >= fits[i].score);
  }

  TEST_CASE("Yerkes law is recovered") {
    const auto fits = fit_candidates(curve_of([](double x) { return 1.6 * std::exp(-4 * x * x) - 1; }, -1, 1, 200));
    CHECK(fits.front().form == CandidateForm::gaussian);
    const auto& c = fits.front().coefficients;
    CHECK(std::abs(c[0] - 1.6) <= 0.05);
    CHECK(std::abs(c[1] - 4.0) <= 0.1);
    CHECK(std::abs(c[2] + 1.0) <= 0.05);
  }

  TEST_CASE("constant curve") {
    const auto fits = fit_candidates(curve_of([](double) { return 0.7; }, -1, 1, 30));
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].form == CandidateForm::affine);
    CHECK(fits[0].coefficients[0] == 0.0);
    CHECK(fits[0].coefficients[1] == 0.7);
    CHECK(fits[0].r_squared == 1.0);
  }

  TEST_CASE("every library member recovers itself") {
    check_recovers(CandidateForm::sinusoid, (VectorXd(4) << 0.8, 2.5, 0.3, 0.1).finished(), -1, 1);
    check_recovers(CandidateForm::sinusoid, (VectorXd(4) << 1.3, 6.2, -1.1, -0.4).finished(), -1, 1);
    check_recovers(CandidateForm::gaussian, (VectorXd(3) << 1.6, 4.0, -1.0).finished(), -1, 1);
    check_recovers(CandidateForm::gaussian, (VectorXd(3) << -0.7, 1.3, 0.2).finished(), -2, 2);
    check_recovers(CandidateForm::polynomial, (VectorXd(4) << 0.3, -1.2, 0.5, 2.0).finished(), -1, 1);
    check_recovers(CandidateForm::polynomial, (VectorXd(3) << 1.0, 0.4, -0.9).finished(), -1, 1);
    check_recovers(CandidateForm::affine, (VectorXd(2) << -0.4, 0.25).finished(), -1, 1);
  }

  TEST_CASE("fits are deterministic") {
    const auto c = curve_of([](double x) { return std::tanh(2 * x) + 0.1 * x * x; }, -1, 1, 120);
    const auto a = fit_candidates(c), b = fit_candidates(c);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].form == b[i].form);
      CHECK(a[i].coefficients == b[i].coefficients);
      CHECK(a[i].score == b[i].score);
    }
  }

  TEST_CASE("degenerate curves") {
    CHECK_THROWS_AS(fit_candidates(curve_of([](double x) { return x; }, -1, 1, 9)), Error);
    CHECK_THROWS_AS(fit_candidates(curve_of([](double x) { return x; }, 0.5, 0.5, 20)), Error);
  }
}

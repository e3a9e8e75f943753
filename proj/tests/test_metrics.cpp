#include <doctest.h>

#include "kafcm/error.hpp"
#include "kafcm/metrics.hpp"
#include "kafcm/rng.hpp"

using namespace kafcm;
using Eigen::VectorXd;

TEST_SUITE("metrics") {
  TEST_CASE("perfect prediction") {
    const VectorXd t = VectorXd::LinSpaced(5, 1, 2);
    const auto r = compute_metrics(t, t);
    CHECK(r.mse == 0.0);
    CHECK(r.mape_percent == std::optional<double>(0.0));
    CHECK(r.max_abs_error == 0.0);
    CHECK(r.std_dev_error == 0.0);
    CHECK(r.n == 5);
  }

  TEST_CASE("hand example") {
    const auto r = compute_metrics(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 2));
    CHECK(r.mse == 0.5);
    CHECK(*r.mape_percent == 25.0);
    CHECK(r.max_abs_error == 1.0);
    CHECK(r.std_dev_error == 0.5);
  }

  TEST_CASE("zero target leaves MAPE undefined") {
    const auto r = compute_metrics(Eigen::Vector3d(0.1, 1, 2), Eigen::Vector3d(0, 1, 2.5));
    CHECK_FALSE(r.mape_percent.has_value());
    CHECK(r.mse == doctest::Approx((0.01 + 0.25) / 3));
  }

  TEST_CASE("bad inputs") {
    try {
      compute_metrics(VectorXd::Zero(2), VectorXd::Zero(3));
      FAIL("expected shape-mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::shape_mismatch);
    }
    try {
      compute_metrics(VectorXd(0), VectorXd(0));
      FAIL("expected empty-input");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::empty_input);
    }
  }

  TEST_CASE("scaling, permutation and the max-abs bound") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + static_cast<int>(rng.next() % 40);
      VectorXd p(n), t(n);
      for (int i = 0; i < n; ++i) {
        p[i] = rng.uniform(-2, 2);
        t[i] = rng.uniform(0.1, 2);
      }
      const auto r = compute_metrics(p, t);
      CHECK(r.max_abs_error * r.max_abs_error >= r.mse);
      CHECK(r.mse >= 0);
      CHECK(r.std_dev_error >= 0);

      const double c = rng.uniform(0.1, 10);
      const auto s = compute_metrics(c * p, c * t);
      CHECK(s.mse == doctest::Approx(c * c * r.mse).epsilon(1e-12));
      CHECK(s.max_abs_error == doctest::Approx(c * r.max_abs_error).epsilon(1e-12));
      CHECK(s.std_dev_error == doctest::Approx(c * r.std_dev_error).epsilon(1e-12));
      CHECK(*s.mape_percent == doctest::Approx(*r.mape_percent).epsilon(1e-12));

      VectorXd pp = p.reverse(), tt = t.reverse();
      const auto q = compute_metrics(pp, tt);
      CHECK(q.mse == doctest::Approx(r.mse).epsilon(1e-14));
      CHECK(q.max_abs_error == r.max_abs_error);
      CHECK(*q.mape_percent == doctest::Approx(*r.mape_percent).epsilon(1e-14));
    }
  }

  TEST_CASE("JSON and table") {
    const auto r = compute_metrics(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 2));
    const auto j = to_json(r, "kafcm", "test.csv");
    CHECK(j["model"] == "kafcm");
    CHECK(j["dataset"] == "test.csv");
    const auto back = metrics_from_json(j);
    CHECK(back.mse == r.mse);
    CHECK(back.mape_percent == r.mape_percent);
    CHECK(back.n == r.n);

    auto undefined = r;
    undefined.mape_percent.reset();
    CHECK(to_json(undefined)["mape_percent"].is_null());
    CHECK_FALSE(metrics_from_json(to_json(undefined)).mape_percent.has_value());

    const auto table = comparison_table({{"fcm", r}, {"mlp", undefined}, {"kafcm", r}});
    CHECK(table ==
          "model,mse,mape_percent,max_abs_error,std_dev_error\n"
          "fcm,0.5,25,1,0.5\n"
          "mlp,0.5,,1,0.5\n"
          "kafcm,0.5,25,1,0.5\n");
  }
}

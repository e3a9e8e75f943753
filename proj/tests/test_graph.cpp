#include <doctest.h>

#include <ranges>

#include "kafcm/error.hpp"
#include "kafcm/graph.hpp"
#include "kafcm/io.hpp"
#include "support.hpp"

using namespace kafcm;
using test_support::shared_grid;

namespace {

KAFCMModel empty_model(int n, BoundingOp op) {
  return make_kafcm(n, shared_grid(-1, 1, 5, 3), MaskMatrix::Constant(n, n, false), op, BaseKind::silu, 0);
}

KAFCMModel dense_model(int n, BoundingOp op, std::uint64_t seed, double scale) {
  auto m = make_kafcm(n, shared_grid(-1, 1, 5, 3), MaskMatrix::Constant(n, n, true), op, BaseKind::silu, seed);
  Rng rng(seed);
  test_support::randomize(m, rng, scale);
  return m;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("bounding operators") {
    CHECK(bound(BoundingOp::smooth_clip, 0.5) == 0.5);
    CHECK(bound(BoundingOp::smooth_clip, 0.0) == doctest::Approx(0.01798620996209156));
    CHECK(bound(BoundingOp::smooth_clip, 1.0) == doctest::Approx(0.9820137900379085));
    CHECK(bound(BoundingOp::tanh, 0.4) == std::tanh(0.4));
    CHECK(bound(BoundingOp::identity, -3.0) == -3.0);
    for (auto op : {BoundingOp::smooth_clip, BoundingOp::tanh, BoundingOp::identity})
      for (double s = -2; s <= 2; s += 0.1) {
        const double fd = (bound(op, s + 1e-6) - bound(op, s - 1e-6)) / 2e-6;
        CHECK(test_support::close(bound_derivative(op, s), fd, 1e-6, 1e-9));
      }
  }

  TEST_CASE("no edges") {
    const auto clip = kafcm_step(empty_model(3, BoundingOp::smooth_clip), Eigen::Vector3d(0.2, 0.9, -0.4));
    for (int i = 0; i < 3; ++i) CHECK(clip[i] == doctest::Approx(0.01798620996209156));
    CHECK(kafcm_step(empty_model(3, BoundingOp::identity), Eigen::Vector3d(0.2, 0.9, -0.4)).isZero(0.0));
  }

  TEST_CASE("a single SiLU edge") {
    auto m = empty_model(2, BoundingOp::identity);
    m.mask(1, 0) = true;
    m.edge(1, 0).alpha.setZero();
    const auto out = kafcm_step(m, Eigen::Vector2d(0.35, -0.8));
    CHECK(out[0] == 0.0);
    CHECK(out[1] == silu(0.35));
  }

  TEST_CASE("standard FCM step") {
    StandardFCM zero{MatrixXd::Zero(3, 3), BoundingOp::tanh};
    CHECK(fcm_step(zero, Eigen::Vector3d(1, -1, 0.5)).isZero(0.0));
    StandardFCM one{MatrixXd::Ones(1, 1), BoundingOp::identity};
    CHECK(fcm_step(one, VectorXd::Constant(1, 0.3))[0] == 0.3);
    StandardFCM two{(MatrixXd(2, 2) << 0, 0, 0.5, 0).finished(), BoundingOp::tanh};
    const auto out = fcm_step(two, Eigen::Vector2d(0.8, 0));
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(std::tanh(0.4)));
  }

  TEST_CASE("dimension mismatch") {
    auto m = empty_model(3, BoundingOp::identity);
    try {
      kafcm_step(m, Eigen::Vector2d(0, 0));
      FAIL("expected dimension-mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::dimension_mismatch);
    }
    StandardFCM f{MatrixXd::Zero(3, 3), BoundingOp::tanh};
    CHECK_THROWS_AS(fcm_step(f, VectorXd::Zero(4)), Error);
    CHECK_THROWS_AS(simulate(f, VectorXd::Zero(4), 3), Error);
  }

  TEST_CASE("simulate") {
    const auto m = dense_model(3, BoundingOp::tanh, 5, 0.5);
    const Eigen::Vector3d c0(0.1, -0.2, 0.3);
    const auto one = simulate(m, c0, 1);
    REQUIRE(one.length() == 2);
    CHECK(one.states[0] == c0);
    CHECK(one.states[1] == kafcm_step(m, c0));
    CHECK_THROWS_AS(simulate(m, c0, 0), Error);

    const auto zero = simulate(empty_model(3, BoundingOp::identity), c0, 5);
    CHECK(zero.length() == 6);
    for (int t = 1; t <= 5; ++t) CHECK(zero.states[t].isZero(0.0));
  }

  TEST_CASE("fixed points stay put") {
    // smooth_clip with small weights is a contraction
    const auto m = dense_model(3, BoundingOp::smooth_clip, 12, 0.05);
    VectorXd c = VectorXd::Constant(3, 0.5);
    for (int i = 0; i < 2000; ++i) c = kafcm_step(m, c);
    const auto traj = simulate(m, c, 20);
    for (const auto& s : traj.states) CHECK((s - c).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("states stay inside the bounding range") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const auto clip = dense_model(4, BoundingOp::smooth_clip, 100 + trial, 0.3);
      const auto th = dense_model(4, BoundingOp::tanh, 200 + trial, 0.3);
      VectorXd c0(4);
      for (int i = 0; i < 4; ++i) c0[i] = rng.uniform(-1, 1);
      const auto a = simulate(clip, c0, 30), b = simulate(th, c0, 30);
      for (const auto& s : a.states | std::views::drop(1)) CHECK(((s.array() > 0.0) && (s.array() < 1.0)).all());
      for (const auto& s : b.states | std::views::drop(1)) CHECK(((s.array() > -1.0) && (s.array() < 1.0)).all());
    }
  }

  TEST_CASE("masked edges have no influence") {
    auto m = dense_model(4, BoundingOp::tanh, 3, 1.0);
    m.mask(2, 1) = false;
    m.mask(0, 3) = false;
    const Eigen::Vector4d c(0.1, 0.5, -0.7, 0.9);
    const auto before = kafcm_step(m, c);
    m.edge(2, 1).w_base = 50.0;
    m.edge(2, 1).alpha.setConstant(-9.0);
    m.edge(0, 3).w_spline = 1e6;
    CHECK(kafcm_step(m, c) == before);
  }

  TEST_CASE("blow-ups are reported") {
    StandardFCM f{MatrixXd::Constant(2, 2, 1e200), BoundingOp::identity};
    try {
      simulate(f, Eigen::Vector2d(1, 1), 5);
      FAIL("expected non-finite-state");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::non_finite_state);
    }
  }

  TEST_CASE("trajectory CSV") {
    Trajectory t;
    t.states = {Eigen::Vector2d(0.5, 0.25), Eigen::Vector2d(1, -1)};
    CHECK(trajectory_csv(t) == "t,c_0,c_1\n0,0.5,0.25\n1,1,-1\n");
  }

  TEST_CASE("tag names") {
    for (auto op : {BoundingOp::smooth_clip, BoundingOp::tanh, BoundingOp::identity})
      CHECK(bounding_from_string(to_string(op)) == op);
    CHECK(base_kind_from_string("identity") == BaseKind::identity);
    CHECK_THROWS_AS(bounding_from_string("relu"), Error);
  }
}

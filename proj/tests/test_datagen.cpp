#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "kafcm/datagen.hpp"
#include "kafcm/error.hpp"

using namespace kafcm;

namespace {

bool same(const Dataset& a, const Dataset& b) {
  return a.inputs == b.inputs && a.targets == b.targets && a.metadata.generator == b.metadata.generator &&
         a.metadata.params == b.metadata.params && a.metadata.seed == b.metadata.seed;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

}  // namespace

TEST_SUITE("datagen") {
  TEST_CASE("Yerkes law") {
    CHECK(yerkes_law(0.0) == doctest::Approx(0.6));
    CHECK(yerkes_law(1.0) == doctest::Approx(-0.970694).epsilon(1e-6));
    CHECK(yerkes_law(-1.0) == yerkes_law(1.0));
    const auto d = gen_yerkes(500, 0.0, 3);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      CHECK(d.inputs(i, 0) >= -1.0);
      CHECK(d.inputs(i, 0) <= 1.0);
      CHECK(d.targets(i, 0) == yerkes_law(d.inputs(i, 0)));
      CHECK(yerkes_law(d.inputs(i, 0)) == yerkes_law(-d.inputs(i, 0)));
    }
  }

  TEST_CASE("Yerkes noise") {
    const auto clean = gen_yerkes(2000, 0.0, 4);
    const auto noisy = gen_yerkes(2000, 0.05, 4);
    CHECK(clean.inputs == noisy.inputs);
    const VectorXd eps = noisy.targets.col(0) - clean.targets.col(0);
    const double sd = std::sqrt((eps.array() - eps.mean()).square().mean());
    CHECK(sd == doctest::Approx(0.05).epsilon(0.08));
    CHECK(std::abs(eps.mean()) < 0.01);
    CHECK(noiseless_targets(noisy) == clean.targets);
    CHECK(same(gen_yerkes(100, 0.05, 9), gen_yerkes(100, 0.05, 9)));
    CHECK_FALSE(same(gen_yerkes(100, 0.05, 9), gen_yerkes(100, 0.05, 10)));
  }

  TEST_CASE("sine") {
    const auto d = gen_sine(1000, 3.0, 1);
    CHECK(d.size() == 1000);
    CHECK(d.input_dim() == 1);
    CHECK(d.target_dim() == 1);
    CHECK(d.inputs.cwiseAbs().maxCoeff() <= 1.0);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double x = d.inputs(i, 0);
      CHECK(d.targets(i, 0) == std::sin(3.0 * x));
      CHECK(std::sin(3.0 * -x) == -d.targets(i, 0));
    }
    CHECK(std::sin(3.0 * std::numbers::pi / 6) == doctest::Approx(1.0));
    const auto wide = gen_sine(1000, 3.0, 1, kSineHalfWidth);
    CHECK(wide.inputs.cwiseAbs().maxCoeff() > 1.5);
    CHECK(wide.inputs.cwiseAbs().maxCoeff() <= kSineHalfWidth);
  }

  TEST_CASE("Mackey-Glass constant history at the fixed point") {
    MackeyGlassParams p;
    p.x0 = 1.0;
    p.washout = 0;
    p.total_steps = 40;
    const auto s = gen_mackey_glass(p);
    REQUIRE(s.size() == 40);
    for (int t = 0; t <= 17; ++t) CHECK(std::abs(s[t] - 1.0) <= 1e-9);
  }

  TEST_CASE("Mackey-Glass canonical run") {
    const MackeyGlassParams p;
    const auto s = gen_mackey_glass(p);
    CHECK(s.size() == 1500);
    CHECK(*std::min_element(s.begin(), s.end()) > 0.2);
    CHECK(*std::max_element(s.begin(), s.end()) < 1.5);
    CHECK(gen_mackey_glass(p) == s);
  }

  TEST_CASE("Mackey-Glass step size convergence") {
    MackeyGlassParams coarse, fine;
    fine.dt = 0.05;
    const auto a = gen_mackey_glass(coarse);
    const auto b = gen_mackey_glass(fine);
    double num = 0, den = 0;
    for (int i = 0; i < 200; ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    CHECK(std::sqrt(num / den) <= 0.02);
  }

  TEST_CASE("Mackey-Glass parameter checks") {
    MackeyGlassParams p;
    p.dt = 0.3;
    CHECK(kind_of([&] { gen_mackey_glass(p); }) == ErrorKind::invalid_config);
    p = {};
    p.washout = p.total_steps;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.x0 = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
  }

  TEST_CASE("lag embedding") {
    const auto d = lag_embed({1, 2, 3, 4, 5, 6}, 4);
    REQUIRE(d.size() == 2);
    CHECK(d.inputs.row(0) == Eigen::RowVector4d(1, 2, 3, 4));
    CHECK(d.inputs.row(1) == Eigen::RowVector4d(2, 3, 4, 5));
    CHECK(d.targets(0, 0) == 5);
    CHECK(d.targets(1, 0) == 6);
    CHECK(kind_of([] { lag_embed({1, 2, 3}, 3); }) == ErrorKind::series_too_short);
    const auto c = lag_embed(std::vector<double>(10, 0.4), 3);
    CHECK((c.inputs.array() == 0.4).all());
    CHECK((c.targets.array() == 0.4).all());
    const auto mg = gen_mackey_dataset(MackeyGlassParams{}, 4, 0);
    CHECK(mg.size() == 1496);
    for (Eigen::Index t = 1; t < mg.size(); ++t) CHECK(mg.inputs(t, 3) == mg.targets(t - 1, 0));
  }

  TEST_CASE("split sizes") {
    const auto s = split_sizes(10, {0.64, 0.16, 0.2});
    CHECK(s[0] == 6);
    CHECK(s[1] == 2);
    CHECK(s[2] == 2);
    const auto k = split_sizes(1000, {0.64, 0.16, 0.2});
    CHECK(k[0] + k[1] + k[2] == 1000);
    CHECK(k[0] == 640);
    CHECK(kind_of([] { split_sizes(10, {0.5, 0.5, 0.5}); }) == ErrorKind::invalid_fractions);
    CHECK(kind_of([] { split_sizes(10, {1.0, 0.0, 0.0}); }) == ErrorKind::invalid_fractions);
  }

  TEST_CASE("chronological split preserves order") {
    const auto d = lag_embed({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, 3);
    const auto parts = split_dataset(d, {0.64, 0.16, 0.2}, false, 0);
    MatrixXd joined(d.size(), 3);
    joined << parts[0].inputs, parts[1].inputs, parts[2].inputs;
    CHECK(joined == d.inputs);
  }

  TEST_CASE("shuffled split is disjoint, exhaustive and seeded") {
    const auto d = gen_sine(97, 3.0, 5);
    const auto a = split_dataset(d, {0.64, 0.16, 0.2}, true, 3);
    const auto b = split_dataset(d, {0.64, 0.16, 0.2}, true, 3);
    const auto c = split_dataset(d, {0.64, 0.16, 0.2}, true, 4);
    std::vector<double> all, orig(d.inputs.data(), d.inputs.data() + d.size());
    for (const auto& part : a) all.insert(all.end(), part.inputs.data(), part.inputs.data() + part.size());
    std::sort(all.begin(), all.end());
    std::sort(orig.begin(), orig.end());
    CHECK(all == orig);
    for (int i = 0; i < 3; ++i) CHECK(a[i].inputs == b[i].inputs);
    CHECK(a[0].inputs != c[0].inputs);
  }

  TEST_CASE("datasets regenerate from metadata") {
    const MackeyGlassParams mg;
    for (const auto& d : {gen_yerkes(300, 0.05, 1), gen_sine(300, 3.0, 2, 1.7), gen_mackey_dataset(mg, 4, 3)}) {
      CHECK(same(regenerate(d.metadata), d));
      for (bool shuffle : {true, false})
        for (const auto& part : split_dataset(d, {0.64, 0.16, 0.2}, shuffle, 6)) CHECK(same(regenerate(part.metadata), part));
    }
    DatasetMetadata junk;
    junk.generator = "lorenz";
    CHECK_THROWS_AS(regenerate(junk), Error);
  }
}

#include <doctest.h>

#include <limits>

#include "kafcm/error.hpp"
#include "kafcm/io.hpp"
#include "support.hpp"

using namespace kafcm;

namespace {

bool same_model(const KAFCMModel& a, const KAFCMModel& b) {
  if (a.n_nodes != b.n_nodes || a.mask != b.mask || a.bounding != b.bounding || !(*a.grid == *b.grid)) return false;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const auto &x = a.edges[i], &y = b.edges[i];
    if (x.w_base != y.w_base || x.w_spline != y.w_spline || x.alpha != y.alpha || x.base != y.base) return false;
  }
  return true;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::invalid_config;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles round trip through text") {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
      const double x = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.next() % 200) - 100);
      CHECK(parse_double(format_double(x)) == x);
    }
    for (double x : {0.0, -0.0, 1e-310, std::numeric_limits<double>::max(), 0.1, 1.0 / 3})
      CHECK(parse_double(format_double(x)) == x);
    CHECK(format_double(0.5) == "0.5");
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
    CHECK(parse_double(" 2.5\r") == 2.5);
    CHECK_THROWS_AS(parse_double("abc"), Error);
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
  }

  TEST_CASE("models round trip") {
    const auto dir = test_support::scratch_dir("io_models");
    const auto layout = SupervisedLayout::feed_forward(2, 1);
    auto km = make_kafcm(3, test_support::shared_grid(-1.3, 0.7, 6, 3), layout.edge_mask(3), BoundingOp::smooth_clip,
                         BaseKind::silu, 5);
    Rng rng(2);
    test_support::randomize(km, rng);
    km.edge(0, 0).base = BaseKind::identity;
    save_model(dir / "k.json", KAFCMFile{km, layout});
    const auto k = std::get<KAFCMFile>(load_model(dir / "k.json"));
    CHECK(same_model(k.model, km));
    CHECK(k.layout.inputs == layout.inputs);
    CHECK(k.layout.outputs == layout.outputs);
    // edges share the loaded grid
    CHECK(k.model.edge(1, 0).grid == k.model.grid);

    StandardFCM f{MatrixXd::Random(3, 3), BoundingOp::tanh};
    save_model(dir / "f.json", FCMFile{f, layout});
    const auto fl = std::get<FCMFile>(load_model(dir / "f.json"));
    CHECK(fl.model.weights == f.weights);
    CHECK(fl.model.activation == f.activation);

    const auto mp = init_mlp(4, 1, 3);
    save_model(dir / "m.json", mp);
    CHECK(std::get<MLPParams>(load_model(dir / "m.json")) == mp);

    // saving the loaded file reproduces the bytes
    save_model(dir / "k2.json", k);
    CHECK(read_text(dir / "k.json") == read_text(dir / "k2.json"));
  }

  TEST_CASE("model prediction through the file variant") {
    const auto layout = SupervisedLayout::feed_forward(1, 1);
    auto km = make_kafcm(2, test_support::shared_grid(-1, 1, 4, 3), layout.edge_mask(2), BoundingOp::identity,
                         BaseKind::silu, 1);
    const ModelFile file = KAFCMFile{km, layout};
    const MatrixXd x = MatrixXd::Constant(3, 1, 0.25);
    CHECK(predict(file, x) == predict(km, layout, x));
    CHECK(model_input_dim(file) == 1);
    CHECK(model_output_dim(file) == 1);
    CHECK(model_kind(file) == "kafcm");
    try {
      predict(file, MatrixXd::Zero(3, 4));
      FAIL("expected shape-mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::shape_mismatch);
      CHECK(std::string(e.what()).find("1 inputs") != std::string::npos);
      CHECK(std::string(e.what()).find("has 4") != std::string::npos);
    }
  }

  TEST_CASE("malformed model files") {
    const auto dir = test_support::scratch_dir("io_bad");
    CHECK(kind_of([&] { load_model(dir / "missing.json"); }) == ErrorKind::io);
    write_text(dir / "a.json", "{not json");
    CHECK(kind_of([&] { load_model(dir / "a.json"); }) == ErrorKind::io);
    write_text(dir / "b.json", R"({"version": 99, "kind": "mlp"})");
    CHECK(kind_of([&] { load_model(dir / "b.json"); }) == ErrorKind::io);
    write_text(dir / "c.json", R"({"version": 1, "kind": "rnn"})");
    CHECK(kind_of([&] { load_model(dir / "c.json"); }) == ErrorKind::io);
    write_text(dir / "d.json", R"({"version": 1, "kind": "fcm"})");
    CHECK(kind_of([&] { load_model(dir / "d.json"); }) == ErrorKind::io);
  }

  TEST_CASE("datasets round trip with metadata") {
    const auto dir = test_support::scratch_dir("io_data");
    const auto d = gen_mackey_dataset(MackeyGlassParams{}, 4, 7);
    const auto parts = split_dataset(d, {0.64, 0.16, 0.2}, false, 1);
    save_dataset(dir / "val.csv", parts[1]);
    CHECK(std::filesystem::exists(dir / "val.json"));
    const auto back = load_dataset(dir / "val.csv");
    CHECK(back.inputs == parts[1].inputs);
    CHECK(back.targets == parts[1].targets);
    CHECK(back.metadata.params == parts[1].metadata.params);
    CHECK(back.metadata.seed == 7);
    CHECK(read_text(dir / "val.csv").starts_with("x_0,x_1,x_2,x_3,y_0\n"));
    CHECK(regenerate(back.metadata).inputs == back.inputs);
  }

  TEST_CASE("dataset CSV parsing") {
    const auto d = parse_dataset_csv("x_0,y_0,y_1\r\n1,2,3\n4,5,6\n");
    CHECK(d.size() == 2);
    CHECK(d.target_dim() == 2);
    CHECK(d.targets(1, 1) == 6);
    CHECK_THROWS_AS(parse_dataset_csv(""), Error);
    CHECK_THROWS_AS(parse_dataset_csv("x_0,y_0\n1\n"), Error);
    CHECK_THROWS_AS(parse_dataset_csv("a,b\n1,2\n"), Error);
  }

  TEST_CASE("grid report CSV") {
    GridSearchReport r;
    r.rows = {{4, 0.1, 500, 0.25, true}, {5, 0.001, 611, std::nan(""), false}};
    const auto text = grid_report_csv(r);
    CHECK(text == "G,eta,epochs,val_error,status\n4,0.1,500,0.25,ok\n5,0.001,611,nan,failed\n");
    const auto rows = parse_grid_csv(text + "6,0.1,5");  // torn trailing line
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].key() == r.rows[0].key());
    CHECK(rows[1].key() == r.rows[1].key());
    CHECK_FALSE(rows[1].ok);
    summarize(r);
    const auto j = grid_summary_json(r);
    CHECK(j["rows"] == 2);
    CHECK(j["best"]["G"] == 4);
  }

  TEST_CASE("small CSV writers") {
    CHECK(history_csv({1.5, 0.25}) == "epoch,loss\n0,1.5\n1,0.25\n");
    EdgeCurve c;
    c.xs = Eigen::Vector2d(-1, 1);
    c.ys = Eigen::Vector2d(0.5, 2);
    CHECK(curve_csv(c) == "x,phi\n-1,0.5\n1,2\n");
    CandidateFit fit{CandidateForm::affine, Eigen::Vector2d(1, 0), 0.5, 0.498};
    const auto j = to_json(std::vector{fit});
    CHECK(j[0]["form"] == "affine");
    CHECK(j[0]["coefficients"].size() == 2);
  }
}

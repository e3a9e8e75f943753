#include "kafcm/experiment.hpp"

#include <fstream>

#include "kafcm/error.hpp"
#include "kafcm/rng.hpp"

namespace kafcm {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::defaults(std::string_view experiment) {
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  c.output_dir = fs::path("out") / c.experiment;
  if (experiment == "yerkes") {
    c.noise_sd = 0.05;
    c.grid_size = 4;
    c.domain = {-1.0, 1.0};
    c.train = {0.1, 610, 0.0, 0, Optimizer::adam};
  } else if (experiment == "sine") {
    c.noise_sd = 0.0;
    c.grid_size = 19;
    c.domain = {-kSineHalfWidth, kSineHalfWidth};
    c.train = {0.1, 1500, 0.0, 0, Optimizer::adam};
  } else if (experiment == "mackey") {
    c.noise_sd = 0.0;
    c.grid_size = 19;
    // series stays in natural amplitude, roughly 0.4..1.35
    c.domain = {0.0, 1.5};
    c.train = {0.05, 1277, 0.0, 0, Optimizer::adam};
    c.extract_target = c.lag;
    c.extract_source = c.lag - 1;
  } else {
    throw Error(ErrorKind::invalid_config, "unknown experiment '" + c.experiment + "'");
  }
  return c;
}

void ExperimentConfig::validate() const {
  (void)defaults(experiment);
  if (model != "kafcm" && model != "fcm" && model != "mlp")
    throw Error(ErrorKind::invalid_config, "unknown model kind '" + model + "'");
  if (n_samples < 10) throw Error(ErrorKind::invalid_config, "n must be >= 10");
  if (!(noise_sd >= 0)) throw Error(ErrorKind::invalid_config, "noise_sd must be >= 0");
  if (!(half_width > 0)) throw Error(ErrorKind::invalid_config, "half_width must be positive");
  if (lag < 1) throw Error(ErrorKind::invalid_config, "lag must be >= 1");
  if (experiment == "mackey") mackey.validate();
  (void)split_sizes(10, split);
  (void)make_uniform_grid(domain[0], domain[1], grid_size, degree);
  train.validate();
  mlp.validate();
  pso.validate();
  gridsearch.validate();
  if (curve_points < 10) throw Error(ErrorKind::invalid_config, "extract points must be >= 10");
}

// ---------------------------------------------------------------------------
// config json

namespace {

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"epochs", t.epochs},
          {"lambda", t.lambda},
          {"optimizer", std::string(to_string(t.optimizer))}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.epochs = j.at("epochs").get<int>();
  t.lambda = j.at("lambda").get<double>();
  t.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  return t;
}

void check_keys(const json& user, const json& ref, const std::string& where) {
  if (!user.is_object()) throw Error(ErrorKind::invalid_config, "config section '" + where + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    if (!ref.contains(key)) throw Error(ErrorKind::invalid_config, "unknown config key '" + where + key + "'");
    if (ref[key].is_object()) check_keys(value, ref[key], where + key + ".");
  }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"model", c.model},
          {"seed", c.seed},
          {"output_dir", c.output_dir.generic_string()},
          {"dataset",
           {{"n", c.n_samples},
            {"noise_sd", c.noise_sd},
            {"frequency", c.frequency},
            {"half_width", c.half_width},
            {"lag", c.lag},
            {"split", c.split},
            {"mackey", mackey_params_to_json(c.mackey)}}},
          {"kafcm",
           {{"grid_size", c.grid_size},
            {"degree", c.degree},
            {"domain", c.domain},
            {"bounding", std::string(to_string(c.bounding))},
            {"base", std::string(to_string(c.base))}}},
          {"train", train_json(c.train)},
          {"mlp", train_json(c.mlp)},
          {"pso",
           {{"swarm_size", c.pso.swarm_size},
            {"iterations", c.pso.iterations},
            {"inertia", c.pso.inertia},
            {"cognitive", c.pso.cognitive},
            {"social", c.pso.social},
            {"weight_bounds", c.pso.weight_bounds}}},
          {"fcm", {{"activation", std::string(to_string(c.fcm_activation))}}},
          {"gridsearch",
           {{"grid_sizes", c.gridsearch.grid_sizes},
            {"learning_rates", c.gridsearch.learning_rates},
            {"epoch_values", c.gridsearch.epoch_values}}},
          {"extract", {{"target", c.extract_target}, {"source", c.extract_source}, {"points", c.curve_points}}}};
}

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
  try {
    const auto name = user.value("experiment", std::string("yerkes"));
    json j = to_json(ExperimentConfig::defaults(name));
    check_keys(user, j, "");
    j.merge_patch(user);

    ExperimentConfig c;
    c.experiment = name;
    c.model = j.at("model").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();

    const auto& d = j.at("dataset");
    c.n_samples = d.at("n").get<int>();
    c.noise_sd = d.at("noise_sd").get<double>();
    c.frequency = d.at("frequency").get<double>();
    c.half_width = d.at("half_width").get<double>();
    c.lag = d.at("lag").get<int>();
    c.split = d.at("split").get<std::array<double, 3>>();
    c.mackey = mackey_params_from_json(d.at("mackey"));

    const auto& k = j.at("kafcm");
    c.grid_size = k.at("grid_size").get<int>();
    c.degree = k.at("degree").get<int>();
    c.domain = k.at("domain").get<std::array<double, 2>>();
    c.bounding = bounding_from_string(k.at("bounding").get<std::string>());
    c.base = base_kind_from_string(k.at("base").get<std::string>());

    c.train = train_from(j.at("train"));
    c.mlp = train_from(j.at("mlp"));

    const auto& p = j.at("pso");
    c.pso.swarm_size = p.at("swarm_size").get<int>();
    c.pso.iterations = p.at("iterations").get<int>();
    c.pso.inertia = p.at("inertia").get<double>();
    c.pso.cognitive = p.at("cognitive").get<double>();
    c.pso.social = p.at("social").get<double>();
    c.pso.weight_bounds = p.at("weight_bounds").get<std::array<double, 2>>();
    c.fcm_activation = bounding_from_string(j.at("fcm").at("activation").get<std::string>());

    const auto& g = j.at("gridsearch");
    c.gridsearch.grid_sizes = g.at("grid_sizes").get<std::vector<int>>();
    c.gridsearch.learning_rates = g.at("learning_rates").get<std::vector<double>>();
    c.gridsearch.epoch_values = g.at("epoch_values").get<std::vector<int>>();

    const auto& e = j.at("extract");
    c.extract_target = e.at("target").get<int>();
    c.extract_source = e.at("source").get<int>();
    c.curve_points = e.at("points").get<int>();

    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

std::uint64_t stream_seed(const ExperimentConfig& config, SeedStream stream) {
  return derive_seed(config.seed, {static_cast<std::uint64_t>(stream)});
}

// ---------------------------------------------------------------------------
// building blocks

DataSplits make_splits(const ExperimentConfig& c) {
  const auto seed = stream_seed(c, SeedStream::data);
  DataSplits s;
  if (c.experiment == "yerkes")
    s.full = gen_yerkes(c.n_samples, c.noise_sd, seed);
  else if (c.experiment == "sine")
    s.full = gen_sine(c.n_samples, c.frequency, seed, c.half_width);
  else
    s.full = gen_mackey_dataset(c.mackey, c.lag, seed);
  auto parts = split_dataset(s.full, c.split, c.shuffle_split(), stream_seed(c, SeedStream::split));
  s.train = std::move(parts[0]);
  s.val = std::move(parts[1]);
  s.test = std::move(parts[2]);
  return s;
}

SupervisedLayout experiment_layout(const ExperimentConfig& c) {
  return SupervisedLayout::feed_forward(c.experiment == "mackey" ? c.lag : 1, 1);
}

KAFCMModel fresh_kafcm(const ExperimentConfig& c, int grid_size, std::uint64_t seed) {
  const auto layout = experiment_layout(c);
  const int n = layout.node_count();
  auto grid = std::make_shared<const KnotGrid<double>>(make_uniform_grid(c.domain[0], c.domain[1], grid_size, c.degree));
  return make_kafcm(n, std::move(grid), layout.edge_mask(n), c.bounding, c.base, seed);
}

StandardFCM fresh_fcm(const ExperimentConfig& c) {
  const int n = experiment_layout(c).node_count();
  return {MatrixXd::Zero(n, n), c.fcm_activation};
}

TrainOutcome train_model(const ExperimentConfig& c, std::string_view kind, const Dataset& train) {
  const auto layout = experiment_layout(c);
  if (train.input_dim() != static_cast<Eigen::Index>(layout.inputs.size()) ||
      train.target_dim() != static_cast<Eigen::Index>(layout.outputs.size()))
    throw Error(ErrorKind::shape_mismatch, "dataset is " + std::to_string(train.input_dim()) + "->" +
                                               std::to_string(train.target_dim()) + ", experiment expects " +
                                               std::to_string(layout.inputs.size()) + "->" +
                                               std::to_string(layout.outputs.size()));
  if (kind == "kafcm") {
    TrainConfig tc = c.train;
    tc.seed = stream_seed(c, SeedStream::kafcm);
    auto result = train_kafcm(fresh_kafcm(c, c.grid_size, tc.seed), layout, train, tc);
    return {KAFCMFile{std::move(result.model), layout}, std::move(result.history)};
  }
  if (kind == "mlp") {
    TrainConfig tc = c.mlp;
    tc.seed = stream_seed(c, SeedStream::mlp);
    auto params = init_mlp(static_cast<int>(train.input_dim()), static_cast<int>(train.target_dim()), tc.seed);
    auto result = mlp_train(std::move(params), train, tc);
    return {std::move(result.params), std::move(result.history)};
  }
  if (kind == "fcm") {
    PSOConfig pc = c.pso;
    pc.seed = stream_seed(c, SeedStream::pso);
    auto result = pso_train_fcm(fresh_fcm(c), layout, train, pc);
    return {FCMFile{std::move(result.model), layout}, std::move(result.history)};
  }
  throw Error(ErrorKind::invalid_config, "unknown model kind '" + std::string(kind) + "'");
}

MatrixXd evaluation_targets(const Dataset& data) { return noiseless_targets(data); }

MetricsReport evaluate_model(const ModelFile& model, const Dataset& data) {
  if (data.target_dim() != model_output_dim(model))
    throw Error(ErrorKind::shape_mismatch, model_kind(model) + " model has " + std::to_string(model_output_dim(model)) +
                                               " outputs, data has " + std::to_string(data.target_dim()));
  const MatrixXd pred = predict(model, data.inputs);
  const MatrixXd target = evaluation_targets(data);
  return compute_metrics(Eigen::Map<const VectorXd>(pred.data(), pred.size()),
                         Eigen::Map<const VectorXd>(target.data(), target.size()));
}

fs::path data_path(const ExperimentConfig& c, std::string_view part) {
  return c.output_dir / "data" / (std::string(part) + ".csv");
}

fs::path model_path(const ExperimentConfig& c, std::string_view kind) {
  return c.output_dir / "models" / (std::string(kind) + ".json");
}

// ---------------------------------------------------------------------------
// commands

void cmd_generate(const ExperimentConfig& c) {
  c.validate();
  const auto s = make_splits(c);
  save_dataset(data_path(c, "dataset"), s.full);
  save_dataset(data_path(c, "train"), s.train);
  save_dataset(data_path(c, "val"), s.val);
  save_dataset(data_path(c, "test"), s.test);
}

ModelFile cmd_train(const ExperimentConfig& c, std::string_view kind) {
  c.validate();
  const auto train = load_dataset(data_path(c, "train"));
  const auto history_file = c.output_dir / "models" / (std::string(kind) + "_history.csv");
  try {
    auto outcome = train_model(c, kind, train);
    save_model(model_path(c, kind), outcome.model);
    write_text(history_file, history_csv(outcome.history));
    return std::move(outcome.model);
  } catch (const DivergenceError& e) {
    write_text(history_file, history_csv(e.history()));
    throw;
  }
}

MetricsReport cmd_evaluate(const ExperimentConfig& c, const fs::path& model_file, const fs::path& dataset_file,
                           const std::optional<fs::path>& table) {
  const auto model = load_model(model_file);
  const auto data = load_dataset(dataset_file);
  const auto report = evaluate_model(model, data);
  const auto kind = model_kind(model);
  write_json(c.output_dir / "reports" / (kind + "_metrics.json"),
             to_json(report, model_file.stem().string(), dataset_file.filename().string()));
  if (table) {
    const bool fresh = !fs::exists(*table);
    if (fresh && table->has_parent_path()) fs::create_directories(table->parent_path());
    std::ofstream out(*table, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot append to " + table->string());
    if (fresh) out << kComparisonHeader << '\n';
    out << comparison_row({kind, report}) << '\n';
  }
  return report;
}

GridSearchReport cmd_gridsearch(const ExperimentConfig& c, int jobs) {
  c.validate();
  const auto train = load_dataset(data_path(c, "train"));
  const auto val = load_dataset(data_path(c, "val"));
  const auto dir = c.output_dir / "gridsearch";
  const auto grid_file = dir / "grid.csv";

  GridSearchOptions options;
  options.base_seed = stream_seed(c, SeedStream::grid);
  options.jobs = jobs;
  if (fs::exists(grid_file)) options.completed = parse_grid_csv(read_text(grid_file));

  // rewrite what survived, then append rows as cells finish
  GridSearchReport partial;
  partial.rows = options.completed;
  write_text(grid_file, grid_report_csv(partial));
  std::ofstream out(grid_file, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::io, "cannot append to " + grid_file.string());
  options.on_row = [&out](const GridSearchRow& row) { out << grid_row_csv(row) << '\n' << std::flush; };

  GridTask task;
  task.make_model = [&c](int g, std::uint64_t seed) { return fresh_kafcm(c, g, seed); };
  task.layout = experiment_layout(c);
  task.metric = c.validation_metric();
  task.lambda = c.train.lambda;
  task.optimizer = c.train.optimizer;

  auto report = grid_search(c.gridsearch, task, train, val, options);
  out.close();
  write_text(grid_file, grid_report_csv(report));
  write_json(dir / "summary.json", grid_summary_json(report));
  return report;
}

std::vector<CandidateFit> cmd_extract(const ExperimentConfig& c, const fs::path& model_file, int target, int source) {
  const auto file = load_model(model_file);
  const auto* k = std::get_if<KAFCMFile>(&file);
  if (!k) throw Error(ErrorKind::invalid_config, "edge extraction needs a kafcm model, got " + model_kind(file));
  const auto& m = k->model;
  if (target < 0 || source < 0 || target >= m.n_nodes || source >= m.n_nodes)
    throw Error(ErrorKind::index_out_of_range, "edge (" + std::to_string(target) + ", " + std::to_string(source) +
                                                   ") outside a " + std::to_string(m.n_nodes) + "-node model");
  if (!m.mask(target, source))
    throw Error(ErrorKind::masked_edge,
                "edge (" + std::to_string(target) + ", " + std::to_string(source) + ") is masked out");
  const auto curve = sample_edge(m.edge(target, source), c.curve_points, target, source);
  auto fits = fit_candidates(curve);
  const auto stem = "edge_" + std::to_string(target) + "_" + std::to_string(source);
  write_text(c.output_dir / "extract" / (stem + ".csv"), curve_csv(curve));
  write_json(c.output_dir / "extract" / (stem + "_fits.json"), to_json(fits));
  return fits;
}

ExperimentSummary cmd_run(const ExperimentConfig& c) {
  cmd_generate(c);
  const auto table = c.output_dir / "reports" / "comparison.csv";
  fs::remove(table);
  ExperimentSummary summary;
  for (const char* kind : {"fcm", "mlp", "kafcm"}) {
    cmd_train(c, kind);
    summary.table.push_back({kind, cmd_evaluate(c, model_path(c, kind), data_path(c, "test"), table)});
  }
  summary.fits = cmd_extract(c, model_path(c, "kafcm"), c.extract_target, c.extract_source);
  return summary;
}

}  // namespace kafcm

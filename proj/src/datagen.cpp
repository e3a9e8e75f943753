#include "kafcm/datagen.hpp"

#include <cmath>
#include <numeric>

#include "kafcm/error.hpp"
#include "kafcm/rng.hpp"

namespace kafcm {

namespace {

bool is_integer_ratio(double num, double den) {
  const double r = num / den;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

}  // namespace

nlohmann::json mackey_params_to_json(const MackeyGlassParams& p) {
  return {{"beta", p.beta},   {"gamma", p.gamma},           {"exponent", p.exponent},
          {"delay", p.delay}, {"dt", p.dt},                 {"total_steps", p.total_steps},
          {"washout", p.washout}, {"x0", p.x0}};
}

MackeyGlassParams mackey_params_from_json(const nlohmann::json& j) {
  MackeyGlassParams p;
  p.beta = j.value("beta", p.beta);
  p.gamma = j.value("gamma", p.gamma);
  p.exponent = j.value("exponent", p.exponent);
  p.delay = j.value("delay", p.delay);
  p.dt = j.value("dt", p.dt);
  p.total_steps = j.value("total_steps", p.total_steps);
  p.washout = j.value("washout", p.washout);
  p.x0 = j.value("x0", p.x0);
  return p;
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), data.input_dim());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), data.target_dim());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.inputs.row(static_cast<Eigen::Index>(r)) = data.inputs.row(rows[r]);
    out.targets.row(static_cast<Eigen::Index>(r)) = data.targets.row(rows[r]);
  }
  return out;
}

}  // namespace

void MackeyGlassParams::validate() const {
  if (!(delay > 0) || !(dt > 0)) throw Error(ErrorKind::invalid_config, "delay and dt must be positive");
  if (!is_integer_ratio(delay, dt)) throw Error(ErrorKind::invalid_config, "dt must divide the delay exactly");
  if (!is_integer_ratio(1.0, dt)) throw Error(ErrorKind::invalid_config, "dt must divide the unit sample spacing");
  if (total_steps <= washout || washout < 0)
    throw Error(ErrorKind::invalid_config, "total_steps must exceed washout >= 0");
  if (!(x0 > 0)) throw Error(ErrorKind::invalid_config, "x0 must be positive");
}

double yerkes_law(double x) { return 1.6 * std::exp(-4.0 * x * x) - 1.0; }

Dataset gen_yerkes(int n, double noise_sd, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::invalid_config, "n must be >= 1");
  if (!(noise_sd >= 0)) throw Error(ErrorKind::invalid_config, "noise_sd must be >= 0");
  Rng xs(seed);
  Rng noise(derive_seed(seed, {1}));
  Dataset d;
  d.inputs.resize(n, 1);
  d.targets.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double x = xs.uniform(-1.0, 1.0);
    d.inputs(i, 0) = x;
    d.targets(i, 0) = yerkes_law(x) + noise_sd * noise.normal();
  }
  d.metadata = {"yerkes", {{"n", n}, {"noise_sd", noise_sd}}, seed};
  return d;
}

Dataset gen_sine(int n, double frequency, std::uint64_t seed, double half_width) {
  if (n < 1) throw Error(ErrorKind::invalid_config, "n must be >= 1");
  if (!(half_width > 0)) throw Error(ErrorKind::invalid_config, "half_width must be positive");
  Rng xs(seed);
  Dataset d;
  d.inputs.resize(n, 1);
  d.targets.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double x = xs.uniform(-half_width, half_width);
    d.inputs(i, 0) = x;
    d.targets(i, 0) = std::sin(frequency * x);
  }
  d.metadata = {"sine", {{"n", n}, {"frequency", frequency}, {"half_width", half_width}}, seed};
  return d;
}

std::vector<double> gen_mackey_glass(const MackeyGlassParams& p) {
  p.validate();
  const auto history_len = static_cast<std::size_t>(std::llround(p.delay / p.dt));
  const auto per_unit = static_cast<long long>(std::llround(1.0 / p.dt));
  const long long total = static_cast<long long>(p.total_steps) * per_unit;
  const long long first_kept = static_cast<long long>(p.washout) * per_unit;

  auto rhs = [&](double x, double delayed) {
    return p.beta * delayed / (1.0 + std::pow(delayed, p.exponent)) - p.gamma * x;
  };

  // history[s % len] holds x(t - delay) at the start of step s
  std::vector<double> history(history_len, p.x0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(p.total_steps - p.washout));
  double x = p.x0;
  const double h = p.dt;
  for (long long s = 0; s < total; ++s) {
    if (s >= first_kept && s % per_unit == 0) out.push_back(x);
    auto& slot = history[static_cast<std::size_t>(s) % history_len];
    const double delayed = slot;
    const double k1 = rhs(x, delayed);
    const double k2 = rhs(x + 0.5 * h * k1, delayed);
    const double k3 = rhs(x + 0.5 * h * k2, delayed);
    const double k4 = rhs(x + h * k3, delayed);
    slot = x;
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x)) throw Error(ErrorKind::instability, "non-finite value at step " + std::to_string(s));
  }
  return out;
}

Dataset lag_embed(const std::vector<double>& series, int lag) {
  if (lag < 1) throw Error(ErrorKind::invalid_config, "lag must be >= 1");
  if (static_cast<int>(series.size()) <= lag)
    throw Error(ErrorKind::series_too_short,
                "series of length " + std::to_string(series.size()) + " with lag " + std::to_string(lag));
  const auto rows = static_cast<Eigen::Index>(series.size()) - lag;
  Dataset d;
  d.inputs.resize(rows, lag);
  d.targets.resize(rows, 1);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (int k = 0; k < lag; ++k) d.inputs(t, k) = series[static_cast<std::size_t>(t + k)];
    d.targets(t, 0) = series[static_cast<std::size_t>(t + lag)];
  }
  d.metadata = {"lag_embed", {{"lag", lag}, {"length", series.size()}}, 0};
  return d;
}

std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const std::array<double, 3>& fractions) {
  double sum = 0;
  for (double f : fractions) {
    if (!(f > 0)) throw Error(ErrorKind::invalid_fractions, "split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::invalid_fractions, "split fractions must sum to 1");

  std::array<Eigen::Index, 3> sizes{};
  std::array<double, 3> remainder{};
  Eigen::Index assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<Eigen::Index>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (Eigen::Index left = n - assigned, k = 0; left > 0; --left, ++k) ++sizes[order[k % 3]];
  return sizes;
}

std::array<Dataset, 3> split_dataset(const Dataset& data, const std::array<double, 3>& fractions, bool shuffle,
                                     std::uint64_t seed) {
  const Eigen::Index n = data.size();
  const auto sizes = split_sizes(n, fractions);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (shuffle) {
    // Fisher-Yates, j = next() mod (i + 1)
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }

  std::array<Dataset, 3> parts;
  Eigen::Index offset = 0;
  for (int part = 0; part < 3; ++part) {
    std::vector<Eigen::Index> rows(order.begin() + offset, order.begin() + offset + sizes[part]);
    parts[part] = take_rows(data, rows);
    offset += sizes[part];
    parts[part].metadata = data.metadata;
    parts[part].metadata.params["split"] = {
        {"fractions", fractions}, {"shuffle", shuffle}, {"seed", seed}, {"part", part}};
  }
  return parts;
}

Dataset regenerate(const DatasetMetadata& metadata) {
  nlohmann::json params = metadata.params;
  nlohmann::json split;
  if (params.contains("split")) {
    split = params["split"];
    params.erase("split");
  }

  Dataset base;
  if (metadata.generator == "yerkes") {
    base = gen_yerkes(params.at("n").get<int>(), params.at("noise_sd").get<double>(), metadata.seed);
  } else if (metadata.generator == "sine") {
    base = gen_sine(params.at("n").get<int>(), params.at("frequency").get<double>(), metadata.seed,
                    params.at("half_width").get<double>());
  } else if (metadata.generator == "mackey_glass") {
    base = gen_mackey_dataset(mackey_params_from_json(params), params.at("lag").get<int>(), metadata.seed);
  } else {
    throw Error(ErrorKind::invalid_config, "cannot regenerate dataset from generator '" + metadata.generator + "'");
  }

  if (split.is_null()) return base;
  const auto parts = split_dataset(base, split.at("fractions").get<std::array<double, 3>>(),
                                   split.at("shuffle").get<bool>(), split.at("seed").get<std::uint64_t>());
  return parts[split.at("part").get<std::size_t>()];
}

MatrixXd noiseless_targets(const Dataset& data) {
  if (data.metadata.generator != "yerkes") return data.targets;
  return data.inputs.col(0).unaryExpr([](double x) { return yerkes_law(x); });
}

Dataset gen_mackey_dataset(const MackeyGlassParams& params, int lag, std::uint64_t seed) {
  Dataset d = lag_embed(gen_mackey_glass(params), lag);
  nlohmann::json meta = mackey_params_to_json(params);
  meta["lag"] = lag;
  d.metadata = {"mackey_glass", meta, seed};
  return d;
}

}  // namespace kafcm

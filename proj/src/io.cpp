#include "kafcm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kafcm/error.hpp"

namespace kafcm {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::io, "not a number: '" + std::string(text) + "'");
  return value;
}

// ---------------------------------------------------------------------------
// Eigen <-> json helpers

namespace {

json vec_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VectorXd vec_from(const json& a) {
  VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json mat_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

MatrixXd mat_from(const json& rows, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows[0].size()) : cols_if_empty;
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) throw Error(ErrorKind::io, "ragged matrix in model file");
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json layout_json(const SupervisedLayout& layout) { return {{"inputs", layout.inputs}, {"outputs", layout.outputs}}; }

SupervisedLayout layout_from(const json& j) {
  SupervisedLayout l;
  l.inputs = j.at("inputs").get<std::vector<int>>();
  l.outputs = j.at("outputs").get<std::vector<int>>();
  return l;
}

json mask_json(const MaskMatrix& mask) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < mask.cols(); ++j) row.push_back(mask(i, j) ? 1 : 0);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json to_json(const KnotGrid<double>& grid) {
  return {{"domain_lo", grid.domain_lo}, {"domain_hi", grid.domain_hi}, {"G", grid.grid_size},
          {"p", grid.degree},            {"knots", vec_json(grid.knots)}};
}

KnotGrid<double> grid_from_json(const json& j) {
  auto grid = make_uniform_grid(j.at("domain_lo").get<double>(), j.at("domain_hi").get<double>(),
                                j.at("G").get<int>(), j.at("p").get<int>());
  if (j.contains("knots")) {
    const VectorXd knots = vec_from(j.at("knots"));
    if (knots.size() != grid.knots.size())
      throw Error(ErrorKind::io, "knot list has " + std::to_string(knots.size()) + " entries, expected " +
                                     std::to_string(grid.knots.size()));
    grid.knots = knots;
  }
  return grid;
}

json to_json(const EdgeFunction<double>& edge) {
  return {{"base", std::string(to_string(edge.base))},
          {"w_base", edge.w_base},
          {"w_spline", edge.w_spline},
          {"alpha", vec_json(edge.alpha)}};
}

namespace {

json kafcm_json(const KAFCMFile& f) {
  const auto& m = f.model;
  json edges = json::array();
  for (int i = 0; i < m.n_nodes; ++i)
    for (int j = 0; j < m.n_nodes; ++j) {
      json e = to_json(m.edge(i, j));
      e["target"] = i;
      e["source"] = j;
      edges.push_back(std::move(e));
    }
  return {{"version", kModelFileVersion},
          {"kind", "kafcm"},
          {"n_nodes", m.n_nodes},
          {"bounding", std::string(to_string(m.bounding))},
          {"grid", to_json(*m.grid)},
          {"mask", mask_json(m.mask)},
          {"layout", layout_json(f.layout)},
          {"edges", edges}};
}

KAFCMFile kafcm_from(const json& j) {
  KAFCMFile f;
  auto& m = f.model;
  m.n_nodes = j.at("n_nodes").get<int>();
  if (m.n_nodes < 1) throw Error(ErrorKind::io, "n_nodes must be positive");
  m.bounding = bounding_from_string(j.at("bounding").get<std::string>());
  m.grid = std::make_shared<const KnotGrid<double>>(grid_from_json(j.at("grid")));
  const auto& mask = j.at("mask");
  m.mask = MaskMatrix::Constant(m.n_nodes, m.n_nodes, false);
  if (mask.size() != static_cast<std::size_t>(m.n_nodes)) throw Error(ErrorKind::io, "mask has wrong row count");
  for (int i = 0; i < m.n_nodes; ++i) {
    if (mask[i].size() != static_cast<std::size_t>(m.n_nodes)) throw Error(ErrorKind::io, "mask has wrong width");
    for (int jj = 0; jj < m.n_nodes; ++jj) m.mask(i, jj) = mask[i][jj].get<int>() != 0;
  }
  m.edges.resize(static_cast<std::size_t>(m.n_nodes) * static_cast<std::size_t>(m.n_nodes));
  const auto& edges = j.at("edges");
  if (edges.size() != m.edges.size()) throw Error(ErrorKind::io, "edge list has wrong length");
  const int k = m.grid->basis_count();
  for (const auto& e : edges) {
    const int t = e.at("target").get<int>(), s = e.at("source").get<int>();
    if (t < 0 || s < 0 || t >= m.n_nodes || s >= m.n_nodes) throw Error(ErrorKind::io, "edge index out of range");
    auto& edge = m.edge(t, s);
    edge.grid = m.grid;
    edge.base = base_kind_from_string(e.at("base").get<std::string>());
    edge.w_base = e.at("w_base").get<double>();
    edge.w_spline = e.at("w_spline").get<double>();
    edge.alpha = vec_from(e.at("alpha"));
    if (edge.alpha.size() != k)
      throw Error(ErrorKind::io, "edge alpha has " + std::to_string(edge.alpha.size()) + " entries, expected " +
                                     std::to_string(k));
  }
  f.layout = layout_from(j.at("layout"));
  return f;
}

json mlp_json(const MLPParams& p) {
  return {{"version", kModelFileVersion}, {"kind", "mlp"},         {"W1", mat_json(p.W1)},
          {"b1", vec_json(p.b1)},         {"W2", mat_json(p.W2)},  {"b2", vec_json(p.b2)},
          {"W3", mat_json(p.W3)},         {"b3", vec_json(p.b3)}};
}

MLPParams mlp_from(const json& j) {
  MLPParams p;
  p.W1 = mat_from(j.at("W1"));
  p.b1 = vec_from(j.at("b1"));
  p.W2 = mat_from(j.at("W2"));
  p.b2 = vec_from(j.at("b2"));
  p.W3 = mat_from(j.at("W3"));
  p.b3 = vec_from(j.at("b3"));
  p.validate();
  return p;
}

}  // namespace

json to_json(const ModelFile& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KAFCMFile>) {
          return kafcm_json(m);
        } else if constexpr (std::is_same_v<T, FCMFile>) {
          return {{"version", kModelFileVersion},
                  {"kind", "fcm"},
                  {"activation", std::string(to_string(m.model.activation))},
                  {"weights", mat_json(m.model.weights)},
                  {"layout", layout_json(m.layout)}};
        } else {
          return mlp_json(m);
        }
      },
      model);
}

ModelFile model_from_json(const json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelFileVersion)
      throw Error(ErrorKind::io, "unsupported model file version " + std::to_string(version));
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "kafcm") return kafcm_from(j);
    if (kind == "mlp") return mlp_from(j);
    if (kind == "fcm") {
      FCMFile f;
      f.model.activation = bounding_from_string(j.at("activation").get<std::string>());
      f.model.weights = mat_from(j.at("weights"));
      if (f.model.weights.rows() != f.model.weights.cols()) throw Error(ErrorKind::io, "FCM weights not square");
      f.layout = layout_from(j.at("layout"));
      return f;
    }
    throw Error(ErrorKind::io, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("malformed model file: ") + e.what());
  }
}

std::string model_kind(const ModelFile& model) {
  switch (model.index()) {
    case 0: return "kafcm";
    case 1: return "fcm";
    default: return "mlp";
  }
}

int model_input_dim(const ModelFile& model) {
  if (auto* k = std::get_if<KAFCMFile>(&model)) return static_cast<int>(k->layout.inputs.size());
  if (auto* f = std::get_if<FCMFile>(&model)) return static_cast<int>(f->layout.inputs.size());
  return std::get<MLPParams>(model).input_dim();
}

int model_output_dim(const ModelFile& model) {
  if (auto* k = std::get_if<KAFCMFile>(&model)) return static_cast<int>(k->layout.outputs.size());
  if (auto* f = std::get_if<FCMFile>(&model)) return static_cast<int>(f->layout.outputs.size());
  return std::get<MLPParams>(model).output_dim();
}

MatrixXd predict(const ModelFile& model, const MatrixXd& inputs) {
  if (inputs.cols() != model_input_dim(model))
    throw Error(ErrorKind::shape_mismatch, model_kind(model) + " model takes " + std::to_string(model_input_dim(model)) +
                                               " inputs, data has " + std::to_string(inputs.cols()));
  if (auto* k = std::get_if<KAFCMFile>(&model)) return predict(k->model, k->layout, inputs);
  if (auto* f = std::get_if<FCMFile>(&model)) return predict(f->model, f->layout, inputs);
  return mlp_forward(std::get<MLPParams>(model), inputs);
}

// ---------------------------------------------------------------------------
// files

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) { write_json(path, to_json(model)); }

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

// ---------------------------------------------------------------------------
// datasets

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (Eigen::Index j = 0; j < data.input_dim(); ++j) out += (j ? ",x_" : "x_") + std::to_string(j);
  for (Eigen::Index j = 0; j < data.target_dim(); ++j) out += ",y_" + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.input_dim(); ++j) {
      if (j) out += ',';
      out += format_double(data.inputs(i, j));
    }
    for (Eigen::Index j = 0; j < data.target_dim(); ++j) out += ',' + format_double(data.targets(i, j));
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorKind::io, "dataset CSV is empty");
  const auto header = split_line(lines[0]);
  Eigen::Index n_in = 0, n_out = 0;
  for (auto h : header) {
    if (h.starts_with("x_")) {
      if (n_out) throw Error(ErrorKind::io, "x columns must precede y columns");
      ++n_in;
    } else if (h.starts_with("y_")) {
      ++n_out;
    } else {
      throw Error(ErrorKind::io, "unexpected dataset column '" + std::string(h) + "'");
    }
  }
  Dataset d;
  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  d.inputs.resize(rows, n_in);
  d.targets.resize(rows, n_out);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto cells = split_line(lines[static_cast<std::size_t>(i + 1)]);
    if (static_cast<Eigen::Index>(cells.size()) != n_in + n_out)
      throw Error(ErrorKind::io, "dataset row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(n_in + n_out));
    for (Eigen::Index j = 0; j < n_in; ++j) d.inputs(i, j) = parse_double(cells[static_cast<std::size_t>(j)]);
    for (Eigen::Index j = 0; j < n_out; ++j)
      d.targets(i, j) = parse_double(cells[static_cast<std::size_t>(n_in + j)]);
  }
  return d;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  return p.replace_extension(".json");
}

json to_json(const DatasetMetadata& meta) {
  return {{"generator", meta.generator}, {"params", meta.params}, {"seed", meta.seed}};
}

DatasetMetadata metadata_from_json(const json& j) {
  DatasetMetadata m;
  m.generator = j.at("generator").get<std::string>();
  m.params = j.at("params");
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

void save_dataset(const std::filesystem::path& csv_path, const Dataset& data) {
  write_text(csv_path, dataset_csv(data));
  write_json(metadata_path(csv_path), to_json(data.metadata));
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  Dataset d = parse_dataset_csv(read_text(csv_path));
  const auto meta = metadata_path(csv_path);
  if (std::filesystem::exists(meta)) {
    try {
      d.metadata = metadata_from_json(read_json(meta));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::io, meta.string() + ": " + e.what());
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// tables

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index j = 0; j < n; ++j) out += ",c_" + std::to_string(j);
  out += '\n';
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index j = 0; j < n; ++j) out += ',' + format_double(traj.states[t][j]);
    out += '\n';
  }
  return out;
}

std::string history_csv(const std::vector<double>& history) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i) + ',' + format_double(history[i]) + '\n';
  return out;
}

std::string curve_csv(const EdgeCurve& curve) {
  std::string out = "x,phi\n";
  for (Eigen::Index i = 0; i < curve.xs.size(); ++i)
    out += format_double(curve.xs[i]) + ',' + format_double(curve.ys[i]) + '\n';
  return out;
}

json to_json(const std::vector<CandidateFit>& fits) {
  json a = json::array();
  for (const auto& f : fits)
    a.push_back({{"form", std::string(to_string(f.form))},
                 {"coefficients", vec_json(f.coefficients)},
                 {"r_squared", f.r_squared},
                 {"score", f.score}});
  return a;
}

std::string grid_row_csv(const GridSearchRow& row) {
  return std::to_string(row.grid_size) + ',' + format_double(row.learning_rate) + ',' + std::to_string(row.epochs) +
         ',' + format_double(row.val_error) + ',' + (row.ok ? "ok" : "failed");
}

std::string grid_report_csv(const GridSearchReport& report) {
  std::string out = std::string(kGridHeader) + '\n';
  for (const auto& r : report.rows) out += grid_row_csv(r) + '\n';
  return out;
}

std::vector<GridSearchRow> parse_grid_csv(const std::string& text) {
  const auto lines = lines_of(text);
  std::vector<GridSearchRow> rows;
  if (lines.empty()) return rows;
  if (lines[0] != kGridHeader) throw Error(ErrorKind::io, "grid CSV header mismatch");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i]);
    // a truncated trailing line from an interrupted run is ignored
    if (cells.size() != 5 || (cells[4] != "ok" && cells[4] != "failed")) continue;
    GridSearchRow r;
    r.grid_size = static_cast<int>(parse_double(cells[0]));
    r.learning_rate = parse_double(cells[1]);
    r.epochs = static_cast<int>(parse_double(cells[2]));
    r.val_error = parse_double(cells[3]);
    r.ok = cells[4] == "ok";
    rows.push_back(r);
  }
  return rows;
}

json grid_summary_json(const GridSearchReport& report) {
  json j;
  j["rows"] = report.rows.size();
  std::size_t ok = 0;
  for (const auto& r : report.rows) ok += r.ok;
  j["ok_rows"] = ok;
  if (report.best) {
    const auto& b = report.rows[*report.best];
    j["best"] = {{"G", b.grid_size}, {"eta", b.learning_rate}, {"epochs", b.epochs}, {"val_error", b.val_error}};
  } else {
    j["best"] = nullptr;
  }
  j["correlations"] = {{"G", report.correlations.grid_size},
                       {"eta", report.correlations.learning_rate},
                       {"epochs", report.correlations.epochs}};
  return j;
}

}  // namespace kafcm

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <string>

#include "kafcm/graph.hpp"
#include "kafcm/rng.hpp"
#include "kafcm/spline.hpp"

namespace test_support {

inline bool close(double got, double want, double rel, double abs) {
  return std::abs(got - want) <= std::max(abs, rel * std::max(std::abs(got), std::abs(want)));
}

inline std::shared_ptr<const kafcm::KnotGrid<double>> shared_grid(double lo, double hi, int g, int p) {
  return std::make_shared<const kafcm::KnotGrid<double>>(kafcm::make_uniform_grid(lo, hi, g, p));
}

/// Distance from x to the nearest knot.
inline double knot_distance(const kafcm::KnotGrid<double>& grid, double x) {
  return (grid.knots.array() - x).abs().minCoeff();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kafcm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random model: every edge gets w_base, w_spline, alpha ~ U[-scale, scale].
inline void randomize(kafcm::KAFCMModel& model, kafcm::Rng& rng, double scale = 1.0) {
  for (auto& e : model.edges) {
    e.w_base = rng.uniform(-scale, scale);
    e.w_spline = rng.uniform(-scale, scale);
    for (Eigen::Index k = 0; k < e.alpha.size(); ++k) e.alpha[k] = rng.uniform(-scale, scale);
  }
}

}  // namespace test_support

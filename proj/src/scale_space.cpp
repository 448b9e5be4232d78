#include "spectv/scale_space.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace spectv {

std::string_view to_string(Spacing s) {
  switch (s) {
    case Spacing::Linear: return "linear";
    case Spacing::Logarithmic: return "logarithmic";
    case Spacing::Explicit: return "explicit";
  }
  return "explicit";
}

Spacing parse_spacing(std::string_view s) {
  if (s == "linear" || s == "lin") return Spacing::Linear;
  if (s == "logarithmic" || s == "log") return Spacing::Logarithmic;
  if (s == "explicit") return Spacing::Explicit;
  throw std::invalid_argument("unknown spacing '" + std::string(s) + "' (expected linear or logarithmic)");
}

ScaleGrid::ScaleGrid(std::vector<double> t_values, Spacing spacing) : t_(std::move(t_values)), spacing_(spacing) {
  if (t_.size() < 2) throw std::invalid_argument("ScaleGrid: need at least two scales");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !(t_[i] > 0.0)) throw std::invalid_argument("ScaleGrid: scales must be positive");
    if (i > 0 && !(t_[i] > t_[i - 1])) throw std::invalid_argument("ScaleGrid: scales must be strictly increasing");
  }
}

std::vector<double> ScaleGrid::trapezoid_weights() const {
  const std::size_t n = t_.size();
  std::vector<double> w(n);
  w[0] = 0.5 * (t_[1] - t_[0]);
  w[n - 1] = 0.5 * (t_[n - 1] - t_[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (t_[i + 1] - t_[i - 1]);
  return w;
}

ScaleGrid make_scale_grid(std::size_t n, double t_min, double t_max, Spacing spacing) {
  if (n < 2) throw std::invalid_argument("make_scale_grid: need n >= 2");
  if (!(t_min > 0.0)) throw std::invalid_argument("make_scale_grid: t_min must be positive");
  if (!(t_min < t_max)) throw std::invalid_argument("make_scale_grid: t_min must be below t_max");
  std::vector<double> t(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / last;
    if (spacing == Spacing::Logarithmic) {
      t[i] = t_min * std::pow(t_max / t_min, s);
    } else if (spacing == Spacing::Linear) {
      t[i] = t_min + (t_max - t_min) * s;
    } else {
      throw std::invalid_argument("make_scale_grid: explicit grids are built from values directly");
    }
  }
  t.front() = t_min;
  t.back() = t_max;
  return ScaleGrid(std::move(t), spacing);
}

std::uint64_t field_checksum(const ScalarField& f) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {f.width(), f.height()};
  mix(dims, sizeof dims);
  mix(f.values().data(), f.size() * sizeof(double));
  return h;
}

StageDivergenceError::StageDivergenceError(std::size_t stage, const DivergenceError& cause)
    : DivergenceError(cause.iteration(), "stage " + std::to_string(stage) + ": " + cause.what()), stage_(stage) {}

ScaleSpace compute_scale_space(const ScalarField& f, const ScaleGrid& grid, Fidelity fidelity,
                               const SolverConfig& config) {
  ScaleSpace space{grid, {}, {}, fidelity, field_checksum(f)};
  space.solutions.reserve(grid.size());
  space.reports.reserve(grid.size());
  WarmStart warm{f, VectorField(f.width(), f.height())};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    DenoiseResult r;
    try {
      r = solve_denoise(f, grid[i], fidelity, config, warm);
    } catch (const DivergenceError& e) {
      throw StageDivergenceError(i, e);
    }
    space.solutions.push_back(r.u);
    space.reports.push_back(r.report);
    warm.u = std::move(r.u);
    warm.g = std::move(r.g);
  }
  return space;
}

}  // namespace spectv

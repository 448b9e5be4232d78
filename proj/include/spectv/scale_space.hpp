#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "spectv/grid.hpp"
#include "spectv/prox.hpp"

namespace spectv {

enum class Spacing { Linear, Logarithmic, Explicit };

std::string_view to_string(Spacing s);
Spacing parse_spacing(std::string_view s);

/// Strictly increasing positive regularization strengths, at least two.
class ScaleGrid {
public:
  ScaleGrid(std::vector<double> t_values, Spacing spacing = Spacing::Explicit);

  const std::vector<double>& values() const { return t_; }
  Spacing spacing() const { return spacing_; }
  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }

  /// Trapezoidal quadrature weights on the grid nodes.
  std::vector<double> trapezoid_weights() const;

  friend bool operator==(const ScaleGrid&, const ScaleGrid&) = default;

private:
  std::vector<double> t_;
  Spacing spacing_;
};

ScaleGrid make_scale_grid(std::size_t n, double t_min, double t_max, Spacing spacing);

/// FNV-1a over the dimensions and raw value bytes of a field.
std::uint64_t field_checksum(const ScalarField& f);

struct ScaleSpace {
  ScaleGrid grid;
  std::vector<ScalarField> solutions;
  std::vector<EnergyReport> reports;
  Fidelity fidelity;
  std::uint64_t source_checksum;
};

/// Solver divergence at one stage of a sweep.
class StageDivergenceError : public DivergenceError {
public:
  StageDivergenceError(std::size_t stage, const DivergenceError& cause);
  std::size_t stage() const { return stage_; }

private:
  std::size_t stage_;
};

/// Forward variational scale-space: solve the denoising problem at each grid
/// value in order, warm-starting every stage from the previous stage's primal
/// and dual iterates. Stage 0 starts from (f, 0).
ScaleSpace compute_scale_space(const ScalarField& f, const ScaleGrid& grid, Fidelity fidelity,
                               const SolverConfig& config);

}  // namespace spectv

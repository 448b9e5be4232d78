#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectv/grid.hpp"

namespace spectv {

struct Disc {
  double center_x = 0.0;  // column coordinate, pixels
  double center_y = 0.0;  // row coordinate, pixels
  double radius = 0.0;
  double contrast = 0.0;  // added to the background inside the disc
};

struct PhantomSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  double background = 0.0;
  std::vector<Disc> discs;

  /// Throws std::invalid_argument on zero dimensions or radius < 2.
  void validate() const;
};

/// Rasterizes discs by a center-distance test (no anti-aliasing). Later discs
/// overwrite earlier ones.
ScalarField disc_phantom(const PhantomSpec& spec);

/// Binary support mask of one disc on the given grid.
ScalarField disc_mask(std::size_t width, std::size_t height, const Disc& disc);

/// Plateau height of the L2-TV solution for f = c * 1_{B_r}.
double oracle_l2_disc(double c, double r, double t);

struct L1DiscSolution {
  double height;  // NaN when the solution is not unique
  bool unique;
  double range_low;
  double range_high;
};

/// L1-TV solution for f = c * 1_{B_r}: f below r/2, zero above, any c'*f at r/2.
L1DiscSolution oracle_l1_disc(double c, double r, double t);

/// Discrete perimeter (TV of the mask) over pixel area.
double cheeger_ratio(const ScalarField& mask);

struct BruteForceResult {
  double min_energy;
  ScalarField minimizer;
};

inline constexpr std::size_t kBruteForceMaxPixels = 20;

/// Exhaustive minimum of the L1-TV energy over all {0,1}-valued candidates.
/// Ties resolve to the lexicographically first candidate in row-major order.
BruteForceResult brute_force_l1tv(const ScalarField& f, double alpha);

// Disc experiment diagnostics shared by oracle-check and the acceptance suite.

/// Mean of u over the pixels where mask is 1.
double plateau_height(const ScalarField& u, const ScalarField& mask);

/// First index whose solution keeps less than `fraction` of the masked
/// energy |f * mask|^2, measured as |u * mask|^2.
std::optional<std::size_t> vanishing_stage(std::span<const ScalarField> solutions, const ScalarField& f,
                                           const ScalarField& mask, double fraction = 0.01);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spectv

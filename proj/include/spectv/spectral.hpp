#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spectv/grid.hpp"
#include "spectv/prox.hpp"
#include "spectv/scale_space.hpp"

namespace spectv {

/// A scale-space was decomposed against data it was not computed from.
class ForeignScaleSpaceError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Spectral slices over a scale grid.
///
/// In L1 mode phi[i] are increments u_{i-1} - u_i (u_{-1} = f) and response[i]
/// holds the raw S^2 = <phi_i, f>. In L2 mode phi[i] = t_i * u_tt(t_i) and
/// response[i] holds S = |phi_i|_1; L2 slices are densities and need
/// quadrature weights when integrated.
struct SpectralDecomposition {
  ScaleGrid grid;
  std::vector<ScalarField> phi;
  std::vector<double> response;
  Fidelity mode;
  double c_hat;  // median of f (L1) or mean of f (L2)
  ScalarField tail;
  std::uint64_t source_checksum;

  std::size_t size() const { return phi.size(); }
  /// Integration weight of slice i: 1 for L1, trapezoidal dt for L2.
  std::vector<double> slice_weights() const;
};

/// Filter weights H(t_i) per scale index plus H(infinity).
struct FilterSpec {
  std::vector<double> weights;
  double weight_inf = 0.0;

  static FilterSpec all_pass(std::size_t n) { return {std::vector<double>(n, 1.0), 1.0}; }
  /// Indicator of the inclusive index interval [first, last], H(inf) = 0.
  static FilterSpec band(std::size_t n, std::size_t first, std::size_t last);
};

SpectralDecomposition transform_l1(const ScaleSpace& space, const ScalarField& f);
SpectralDecomposition transform_l2(const ScaleSpace& space, const ScalarField& f);
/// Dispatches on the scale-space fidelity.
SpectralDecomposition transform(const ScaleSpace& space, const ScalarField& f);

/// f_H = sum_i H_i phi_i w_i + H(inf) c_hat, w_i the slice weights.
ScalarField reconstruct(const SpectralDecomposition& dec, const FilterSpec& filter);

/// Binary mask of sum_i H_i phi_i w_i > epsilon; H(inf) does not contribute.
ScalarField segment(const SpectralDecomposition& dec, const FilterSpec& filter, double epsilon = 1e-3);

/// |sum S^2 - |f|^2| / |f|^2 (0 when f = 0). L1 mode only.
double parseval_residual(const SpectralDecomposition& dec, const ScalarField& f);

}  // namespace spectv

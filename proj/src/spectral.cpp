#include "spectv/spectral.hpp"

#include <cmath>

namespace spectv {

namespace {

constexpr double kParsevalFloor = 1e-300;

void check_source(const ScaleSpace& space, const ScalarField& f) {
  if (field_checksum(f) != space.source_checksum)
    throw ForeignScaleSpaceError("scale-space was computed from different data");
  if (space.solutions.size() != space.grid.size())
    throw std::invalid_argument("scale-space is incomplete");
}

void check_filter(const SpectralDecomposition& dec, const FilterSpec& filter) {
  if (filter.weights.size() != dec.size())
    throw std::invalid_argument("filter length " + std::to_string(filter.weights.size()) +
                                " does not match decomposition length " + std::to_string(dec.size()));
}

ScalarField weighted_slice_sum(const SpectralDecomposition& dec, const FilterSpec& filter) {
  const std::vector<double> dt = dec.slice_weights();
  ScalarField out(dec.tail.width(), dec.tail.height());
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const double w = filter.weights[i] * dt[i];
    if (w == 0.0) continue;
    const auto& slice = dec.phi[i];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * slice[k];
  }
  return out;
}

}  // namespace

std::vector<double> SpectralDecomposition::slice_weights() const {
  if (mode == Fidelity::L1) return std::vector<double>(size(), 1.0);
  return grid.trapezoid_weights();
}

FilterSpec FilterSpec::band(std::size_t n, std::size_t first, std::size_t last) {
  if (first > last || last >= n) throw std::invalid_argument("FilterSpec::band: invalid index interval");
  FilterSpec spec{std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = first; i <= last; ++i) spec.weights[i] = 1.0;
  return spec;
}

SpectralDecomposition transform_l1(const ScaleSpace& space, const ScalarField& f) {
  check_source(space, f);
  if (space.fidelity != Fidelity::L1) throw std::invalid_argument("transform_l1: scale-space is not L1");
  SpectralDecomposition dec{space.grid, {}, {}, Fidelity::L1, median(f), space.solutions.back(),
                            space.source_checksum};
  dec.phi.reserve(space.grid.size());
  const ScalarField* previous = &f;
  for (const ScalarField& u : space.solutions) {
    dec.phi.push_back(*previous - u);
    dec.response.push_back(inner_product(dec.phi.back(), f));
    previous = &u;
  }
  return dec;
}

SpectralDecomposition transform_l2(const ScaleSpace& space, const ScalarField& f) {
  check_source(space, f);
  if (space.fidelity != Fidelity::L2) throw std::invalid_argument("transform_l2: scale-space is not L2");
  const std::size_t n = space.grid.size();
  if (n < 3) throw std::invalid_argument("transform_l2: grid needs at least three scales");
  const auto& t = space.grid.values();
  const auto& u = space.solutions;

  SpectralDecomposition dec{space.grid, {}, {}, Fidelity::L2, mean(f), u.back(), space.source_checksum};
  dec.phi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Second divided difference on three consecutive nodes; the endpoints
    // reuse the stencil of their interior neighbour.
    const std::size_t m = i == 0 ? 1 : (i + 1 == n ? n - 2 : i);
    const double h0 = t[m] - t[m - 1];
    const double h1 = t[m + 1] - t[m];
    const double a = 2.0 / (h0 * (h0 + h1));
    const double b = -2.0 / (h0 * h1);
    const double c = 2.0 / (h1 * (h0 + h1));
    ScalarField slice(f.width(), f.height());
    for (std::size_t k = 0; k < slice.size(); ++k)
      slice[k] = t[i] * (a * u[m - 1][k] + b * u[m][k] + c * u[m + 1][k]);
    dec.response.push_back(l1_norm(slice));
    dec.phi.push_back(std::move(slice));
  }
  return dec;
}

SpectralDecomposition transform(const ScaleSpace& space, const ScalarField& f) {
  return space.fidelity == Fidelity::L1 ? transform_l1(space, f) : transform_l2(space, f);
}

ScalarField reconstruct(const SpectralDecomposition& dec, const FilterSpec& filter) {
  check_filter(dec, filter);
  ScalarField out = weighted_slice_sum(dec, filter);
  out += filter.weight_inf * dec.c_hat;
  return out;
}

ScalarField segment(const SpectralDecomposition& dec, const FilterSpec& filter, double epsilon) {
  check_filter(dec, filter);
  if (!(epsilon >= 0.0)) throw std::invalid_argument("segment: epsilon must be nonnegative");
  ScalarField mask = weighted_slice_sum(dec, filter);
  for (double& v : mask.values()) v = v > epsilon ? 1.0 : 0.0;
  return mask;
}

double parseval_residual(const SpectralDecomposition& dec, const ScalarField& f) {
  if (dec.mode != Fidelity::L1) throw std::invalid_argument("parseval_residual: requires an L1 decomposition");
  double total = 0.0;
  for (double s : dec.response) total += s;
  const double norm = l2_norm_sq(f);
  if (norm == 0.0) return 0.0;
  return std::abs(total - norm) / std::max(norm, kParsevalFloor);
}

}  // namespace spectv

#include "spectv/phantoms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spectv/prox.hpp"

namespace spectv {

void PhantomSpec::validate() const {
  if (width == 0 || height == 0) throw std::invalid_argument("phantom: zero dimension");
  for (const Disc& d : discs) {
    if (!(d.radius >= 2.0)) throw std::invalid_argument("phantom: disc radius must be at least 2 pixels");
  }
}

ScalarField disc_phantom(const PhantomSpec& spec) {
  spec.validate();
  ScalarField f(spec.width, spec.height, spec.background);
  for (const Disc& d : spec.discs) {
    const double r2 = d.radius * d.radius;
    for (std::size_t row = 0; row < spec.height; ++row) {
      for (std::size_t col = 0; col < spec.width; ++col) {
        const double dx = static_cast<double>(col) - d.center_x;
        const double dy = static_cast<double>(row) - d.center_y;
        if (dx * dx + dy * dy <= r2) f(row, col) = spec.background + d.contrast;
      }
    }
  }
  return f;
}

ScalarField disc_mask(std::size_t width, std::size_t height, const Disc& disc) {
  PhantomSpec spec{width, height, 0.0, {Disc{disc.center_x, disc.center_y, disc.radius, 1.0}}};
  return disc_phantom(spec);
}

double oracle_l2_disc(double c, double r, double t) {
  if (!(r > 0.0)) throw std::invalid_argument("oracle_l2_disc: radius must be positive");
  return t < c * r / 2.0 ? c - (2.0 / r) * t : 0.0;
}

L1DiscSolution oracle_l1_disc(double c, double r, double t) {
  if (!(r > 0.0)) throw std::invalid_argument("oracle_l1_disc: radius must be positive");
  const double critical = r / 2.0;
  if (t < critical) return {c, true, c, c};
  if (t > critical) return {0.0, true, 0.0, 0.0};
  return {std::numeric_limits<double>::quiet_NaN(), false, std::min(0.0, c), std::max(0.0, c)};
}

double cheeger_ratio(const ScalarField& mask) {
  std::size_t area = 0;
  for (double v : mask.values()) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("cheeger_ratio: mask must be binary");
    if (v == 1.0) ++area;
  }
  if (area == 0) throw std::invalid_argument("cheeger_ratio: empty mask");
  return tv_energy(mask) / static_cast<double>(area);
}

BruteForceResult brute_force_l1tv(const ScalarField& f, double alpha) {
  const std::size_t n = f.size();
  if (n > kBruteForceMaxPixels)
    throw std::invalid_argument("brute_force_l1tv: instance too large (" + std::to_string(n) + " pixels)");
  for (double v : f.values()) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("brute_force_l1tv: data must be binary");
  }
  ScalarField candidate(f.width(), f.height());
  ScalarField best = candidate;
  double best_energy = std::numeric_limits<double>::infinity();
  const std::size_t count = std::size_t{1} << n;
  // Pixel 0 is the most significant bit, so increasing codes walk the
  // candidates in lexicographic order and the first strict minimum wins.
  for (std::size_t code = 0; code < count; ++code) {
    for (std::size_t i = 0; i < n; ++i) candidate[i] = static_cast<double>((code >> (n - 1 - i)) & 1U);
    const double e = energy(candidate, f, alpha, Fidelity::L1).total;
    if (e < best_energy) {
      best_energy = e;
      best = candidate;
    }
  }
  return {best_energy, std::move(best)};
}

double plateau_height(const ScalarField& u, const ScalarField& mask) {
  require_same_shape(u, mask, "plateau_height");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (mask[k] != 0.0) {
      sum += u[k];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("plateau_height: empty mask");
  return sum / static_cast<double>(count);
}

std::optional<std::size_t> vanishing_stage(std::span<const ScalarField> solutions, const ScalarField& f,
                                           const ScalarField& mask, double fraction) {
  auto masked_energy = [&mask](const ScalarField& u) {
    double e = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) e += mask[k] * u[k] * u[k];
    return e;
  };
  require_same_shape(f, mask, "vanishing_stage");
  const double reference = masked_energy(f);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (masked_energy(solutions[i]) < fraction * reference) return i;
  }
  return std::nullopt;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need matching samples, at least two");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace spectv

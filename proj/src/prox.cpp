#include "spectv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spectv {

namespace {

constexpr std::size_t kFiniteCheckStride = 500;
constexpr double kStepSlack = 1e-9;
constexpr double kTiny = 1e-300;

inline double shrink_toward(double arg, double f, double thr) {
  const double d = arg - f;
  if (d > thr) return arg - thr;
  if (d < -thr) return arg + thr;
  return f;
}

}  // namespace

std::string_view to_string(Fidelity f) { return f == Fidelity::L1 ? "l1" : "l2"; }

Fidelity parse_fidelity(std::string_view s) {
  if (s == "l1" || s == "L1") return Fidelity::L1;
  if (s == "l2" || s == "L2") return Fidelity::L2;
  throw std::invalid_argument("unknown fidelity '" + std::string(s) + "' (expected l1 or l2)");
}

SolverConfig::SolverConfig(double tau, double sigma, double theta, std::size_t max_its, double rel_tol)
    : tau_(tau), sigma_(sigma), theta_(theta), max_its_(max_its), rel_tol_(rel_tol) {
  if (!(tau > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("SolverConfig: tau and sigma must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("SolverConfig: theta must lie in [0,1]");
  if (max_its == 0) throw std::invalid_argument("SolverConfig: max_its must be positive");
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("SolverConfig: rel_tol must be nonnegative");
  if (tau * sigma * 8.0 > 1.0 + kStepSlack)
    throw std::invalid_argument("SolverConfig: step sizes violate tau*sigma*8 <= 1");
}

SolverConfig SolverConfig::paper_defaults() { return {0.2, 0.625, 1.0, 50000, 0.0}; }
SolverConfig SolverConfig::test_profile() { return {0.2, 0.625, 1.0, 5000, 1e-8}; }

DivergenceError::DivergenceError(std::size_t iteration, const std::string& detail)
    : std::runtime_error("solver diverged at iteration " + std::to_string(iteration) + ": " + detail),
      iteration_(iteration) {}

VectorField project_dual(VectorField g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double scale = std::max(1.0, std::hypot(g.x[i], g.y[i]));
    g.x[i] /= scale;
    g.y[i] /= scale;
  }
  return g;
}

ScalarField prox_l1_data(const ScalarField& arg, const ScalarField& f, double threshold) {
  require_same_shape(arg, f, "prox_l1_data");
  ScalarField out(arg.width(), arg.height());
  for (std::size_t i = 0; i < arg.size(); ++i) out[i] = shrink_toward(arg[i], f[i], threshold);
  return out;
}

ScalarField prox_l2_data(const ScalarField& arg, const ScalarField& f, double ratio) {
  require_same_shape(arg, f, "prox_l2_data");
  ScalarField out(arg.width(), arg.height());
  // Written as a step from arg toward f so that f is an exact fixed point.
  const double weight = ratio / (1.0 + ratio);
  for (std::size_t i = 0; i < arg.size(); ++i) out[i] = arg[i] + weight * (f[i] - arg[i]);
  return out;
}

EnergyReport energy(const ScalarField& u, const ScalarField& f, double alpha, Fidelity fidelity) {
  require_same_shape(u, f, "energy");
  EnergyReport r;
  r.fidelity_term = fidelity == Fidelity::L1 ? l1_distance(u, f) : 0.5 * l2_norm_sq(u - f);
  r.tv_term = alpha * tv_energy(u);
  r.total = r.fidelity_term + r.tv_term;
  return r;
}

DenoiseResult solve_denoise(const ScalarField& f, double alpha, Fidelity fidelity, const SolverConfig& config,
                            const std::optional<WarmStart>& warm, const IterationObserver& observer,
                            std::size_t observe_every) {
  if (!(alpha > 0.0)) throw std::invalid_argument("solve_denoise: alpha must be positive");
  const std::size_t w = f.width();
  const std::size_t h = f.height();
  const std::size_t n = f.size();

  ScalarField u(w, h);
  VectorField g(w, h);
  if (warm) {
    require_same_shape(warm->u, f, "solve_denoise warm start");
    if (!warm->g.same_shape(f)) throw DimensionError("solve_denoise: warm dual does not match data");
    u = warm->u;
    g = warm->g;
  }
  ScalarField ubar = u;
  std::vector<double> gx(n), gy(n), div(n);

  const double tau = config.tau();
  const double sigma = config.sigma();
  const double theta = config.theta();
  const double step = tau / alpha;
  const double l2_weight = step / (1.0 + step);
  const double tol = config.rel_tol();
  const double* fv = f.values().data();

  std::size_t it = 0;
  while (it < config.max_its()) {
    gradient_into(ubar.values(), w, h, gx, gy);
    double dual_change = 0.0;
    double dual_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double nx = g.x[i] + sigma * gx[i];
      const double ny = g.y[i] + sigma * gy[i];
      const double scale = std::max(1.0, std::sqrt(nx * nx + ny * ny));
      const double px = nx / scale;
      const double py = ny / scale;
      dual_change += std::abs(px - g.x[i]) + std::abs(py - g.y[i]);
      dual_mass += std::abs(px) + std::abs(py);
      g.x[i] = px;
      g.y[i] = py;
    }

    divergence_into(g.x, g.y, w, h, div);
    double primal_change = 0.0;
    double primal_mass = 0.0;
    double* uv = u.values().data();
    double* bv = ubar.values().data();
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = uv[i] + tau * div[i];
      const double next = fidelity == Fidelity::L1 ? shrink_toward(arg, fv[i], step)
                                                   : arg + l2_weight * (fv[i] - arg);
      primal_change += std::abs(next - uv[i]);
      primal_mass += std::abs(uv[i]);
      bv[i] = next + theta * (next - uv[i]);
      uv[i] = next;
    }
    ++it;

    if (observer && observe_every > 0 && it % observe_every == 0) observer(it, u);
    if (it % kFiniteCheckStride == 0 && !(std::isfinite(primal_change) && std::isfinite(dual_change))) {
      throw DivergenceError(it, "non-finite iterate");
    }
    if (tol > 0.0 && primal_change / std::max(primal_mass, kTiny) < tol &&
        dual_change / std::max(dual_mass, kTiny) < tol) {
      break;
    }
  }
  if (!u.all_finite() || !g.all_finite()) throw DivergenceError(it, "non-finite result");

  DenoiseResult result{std::move(u), std::move(g), {}};
  result.report = energy(result.u, f, alpha, fidelity);
  result.report.iterations_used = it;
  return result;
}

}  // namespace spectv

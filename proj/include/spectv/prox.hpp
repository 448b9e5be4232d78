#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "spectv/grid.hpp"

namespace spectv {

enum class Fidelity { L1, L2 };

std::string_view to_string(Fidelity f);
Fidelity parse_fidelity(std::string_view s);

/// Step sizes and stopping rule for the primal-dual iteration.
///
/// The constructor enforces tau*sigma*8 <= 1 (8 bounds the squared norm of the
/// forward-difference gradient), so every instance is a valid configuration.
class SolverConfig {
public:
  SolverConfig(double tau, double sigma, double theta, std::size_t max_its, double rel_tol);

  /// tau=0.2, sigma=0.625, theta=1, 50000 iterations, no early stop.
  static SolverConfig paper_defaults();
  /// Desk-scale profile: 5000 iterations, rel_tol 1e-8.
  static SolverConfig test_profile();

  double tau() const { return tau_; }
  double sigma() const { return sigma_; }
  double theta() const { return theta_; }
  std::size_t max_its() const { return max_its_; }
  double rel_tol() const { return rel_tol_; }

  SolverConfig with_max_its(std::size_t n) const { return {tau_, sigma_, theta_, n, rel_tol_}; }
  SolverConfig with_rel_tol(double t) const { return {tau_, sigma_, theta_, max_its_, t}; }

private:
  double tau_;
  double sigma_;
  double theta_;
  std::size_t max_its_;
  double rel_tol_;
};

struct EnergyReport {
  double fidelity_term = 0.0;
  double tv_term = 0.0;
  double total = 0.0;
  std::size_t iterations_used = 0;
};

/// Non-finite values appeared during the iteration.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t iteration, const std::string& detail);
  std::size_t iteration() const { return iteration_; }

private:
  std::size_t iteration_;
};

/// Pointwise projection onto {|g| <= 1}.
VectorField project_dual(VectorField g);

/// Resolvent of u -> (1/alpha)|u - f|_1 with threshold tau/alpha.
/// Ties |arg - f| == threshold map to f.
ScalarField prox_l1_data(const ScalarField& arg, const ScalarField& f, double threshold);

/// Resolvent of u -> (1/alpha) * 0.5|u - f|^2 with ratio tau/alpha.
ScalarField prox_l2_data(const ScalarField& arg, const ScalarField& f, double ratio);

/// L1: |u-f|_1 + alpha*TV(u).  L2: 0.5|u-f|^2 + alpha*TV(u).
EnergyReport energy(const ScalarField& u, const ScalarField& f, double alpha, Fidelity fidelity);

struct WarmStart {
  ScalarField u;
  VectorField g;
};

struct DenoiseResult {
  ScalarField u;
  VectorField g;
  EnergyReport report;
};

/// Called with (iteration index after the update, current primal iterate).
using IterationObserver = std::function<void(std::size_t, const ScalarField&)>;

/// First-order primal-dual (Chambolle-Pock) solver for TV denoising.
///
/// Each iteration: dual ascent on g with projection onto the unit ball, primal
/// step u + tau*div g through the data resolvent, then extrapolation
/// ubar = u_new + theta*(u_new - u). Starts from u=0, g=0 unless a warm pair is
/// given. Stops after max_its, or once both the relative primal change and the
/// relative dual change fall below rel_tol.
///
/// Throws DivergenceError if non-finite values are detected (checked every 500
/// iterations and at exit).
DenoiseResult solve_denoise(const ScalarField& f, double alpha, Fidelity fidelity, const SolverConfig& config,
                            const std::optional<WarmStart>& warm = std::nullopt,
                            const IterationObserver& observer = {}, std::size_t observe_every = 100);

}  // namespace spectv

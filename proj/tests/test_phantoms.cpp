#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "spectv/phantoms.hpp"
#include "spectv/prox.hpp"
#include "spectv/scale_space.hpp"
#include "support.hpp"

using namespace spectv;

namespace {

// Perimeter of a binary image counted pixel by pixel: each pixel contributes
// the length of (right neighbour - self, lower neighbour - self), with missing
// neighbours treated as equal to self.
double counted_perimeter(const ScalarField& m) {
  double p = 0.0;
  for (std::size_t r = 0; r < m.height(); ++r) {
    for (std::size_t c = 0; c < m.width(); ++c) {
      const double a = c + 1 < m.width() ? m(r, c + 1) - m(r, c) : 0.0;
      const double b = r + 1 < m.height() ? m(r + 1, c) - m(r, c) : 0.0;
      p += std::hypot(a, b);
    }
  }
  return p;
}

double l1_tv_energy(const ScalarField& u, const ScalarField& f, double alpha) {
  double fid = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) fid += std::abs(u[k] - f[k]);
  return fid + alpha * counted_perimeter(u);
}

// Gray-code enumeration with pixel 0 as the least significant bit; ties are
// resolved afterwards by lexicographic comparison.
BruteForceResult gray_code_minimum(const ScalarField& f, double alpha) {
  const std::size_t n = f.size();
  ScalarField u(f.width(), f.height());
  std::optional<BruteForceResult> best;
  for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
    const std::size_t g = k ^ (k >> 1);
    for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>((g >> i) & 1U);
    const double e = l1_tv_energy(u, f, alpha);
    if (!best || e < best->min_energy - 1e-9) {
      best = BruteForceResult{e, u};
    } else if (std::abs(e - best->min_energy) <= 1e-9 &&
               std::lexicographical_compare(u.values().begin(), u.values().end(), best->minimizer.values().begin(),
                                            best->minimizer.values().end())) {
      best->minimizer = u;
    }
  }
  return *best;
}

std::size_t count_ones(const ScalarField& m) {
  return static_cast<std::size_t>(std::count(m.values().begin(), m.values().end(), 1.0));
}

}  // namespace

TEST_SUITE("phantoms_oracles") {

TEST_CASE("phantom rasterization") {
  CHECK(disc_phantom({7, 5, 0.25, {}}) == ScalarField(7, 5, 0.25));

  const ScalarField one = disc_phantom({128, 128, 0.0, {{63.5, 63.5, 16.0, 1.0}}});
  const double area = std::numbers::pi * 16.0 * 16.0;
  CHECK(std::abs(static_cast<double>(count_ones(one)) - area) <= 0.03 * area);
  CHECK(one(63, 63) == 1.0);
  CHECK(one(0, 0) == 0.0);

  const ScalarField small = disc_phantom({5, 5, 0.0, {{2.0, 2.0, 2.0, 1.0}}});
  CHECK(count_ones(small) == 13);  // lattice points with x^2 + y^2 <= 4
  CHECK(small(0, 2) == 1.0);
  CHECK(small(1, 1) == 1.0);
  CHECK(small(0, 1) == 0.0);

  // Center coordinates are (column, row).
  const ScalarField shifted = disc_phantom({20, 10, 0.0, {{15.0, 4.0, 2.0, 1.0}}});
  CHECK(shifted(4, 15) == 1.0);
  CHECK(shifted(4, 4) == 0.0);
}

TEST_CASE("later discs overwrite earlier ones") {
  const double bg = 0.2;
  const ScalarField f = disc_phantom({64, 64, bg, {{31.5, 31.5, 20.0, 0.3}, {31.5, 31.5, 6.0, 0.9}}});
  CHECK(f(31, 31) == doctest::Approx(bg + 0.9));
  CHECK(f(31, 31 + 12) == doctest::Approx(bg + 0.3));
  CHECK(f(0, 0) == bg);
  const ScalarField reversed = disc_phantom({64, 64, bg, {{31.5, 31.5, 6.0, 0.9}, {31.5, 31.5, 20.0, 0.3}}});
  CHECK(reversed(31, 31) == doctest::Approx(bg + 0.3));
}

TEST_CASE("phantom specs are validated") {
  CHECK_THROWS_AS(disc_phantom({0, 4, 0.0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(disc_phantom({8, 8, 0.0, {{4.0, 4.0, 1.5, 1.0}}}), std::invalid_argument);
  CHECK_NOTHROW(disc_phantom({8, 8, 0.0, {{4.0, 4.0, 2.0, 1.0}}}));
  CHECK_THROWS_AS(disc_mask(8, 8, {4.0, 4.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("closed-form L2 disc solution") {
  CHECK(oracle_l2_disc(1.0, 10.0, 0.0) == 1.0);
  CHECK(oracle_l2_disc(1.0, 10.0, 2.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(oracle_l2_disc(1.0, 10.0, 5.0) == 0.0);
  CHECK(oracle_l2_disc(0.5, 16.0, 3.0) == doctest::Approx(0.125));
  CHECK(oracle_l2_disc(0.5, 16.0, 4.0) == 0.0);
  CHECK_THROWS_AS(oracle_l2_disc(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("closed-form L1 disc solution") {
  const L1DiscSolution below = oracle_l1_disc(0.3, 10.0, 4.0);
  CHECK(below.unique);
  CHECK(below.height == 0.3);
  const L1DiscSolution at = oracle_l1_disc(0.3, 10.0, 5.0);
  CHECK_FALSE(at.unique);
  CHECK(std::isnan(at.height));
  CHECK(at.range_low == 0.0);
  CHECK(at.range_high == 0.3);
  const L1DiscSolution above = oracle_l1_disc(0.3, 10.0, 6.0);
  CHECK(above.unique);
  CHECK(above.height == 0.0);
  // The critical scale does not depend on the height.
  for (double c : {0.05, 0.25, 0.9, 3.0}) {
    CHECK(oracle_l1_disc(c, 16.0, 7.99).height == c);
    CHECK(oracle_l1_disc(c, 16.0, 8.01).height == 0.0);
  }
}

TEST_CASE("cheeger ratio examples") {
  CHECK(cheeger_ratio(ScalarField(9, 7, 1.0)) == 0.0);

  const ScalarField disc = disc_mask(128, 128, {63.5, 63.5, 16.0, 1.0});
  const double ratio = cheeger_ratio(disc);
  const double counted = counted_perimeter(disc) / static_cast<double>(count_ones(disc));
  CHECK(ratio == doctest::Approx(counted).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(0.143928).epsilon(1e-5));
  // Forward-difference perimeters of digital circles run about 15% long.
  CHECK(std::abs(ratio - 2.0 / 16.0) <= 0.17 * (2.0 / 16.0));

  ScalarField square(40, 40);
  for (std::size_t r = 10; r < 30; ++r) {
    for (std::size_t c = 10; c < 30; ++c) square(r, c) = 1.0;
  }
  const double sq = cheeger_ratio(square);
  CHECK(sq == doctest::Approx(counted_perimeter(square) / 400.0).epsilon(1e-12));
  CHECK(std::abs(sq - 0.2) <= 0.15 * 0.2);
}

TEST_CASE("cheeger ratio rejects empty and non-binary masks") {
  CHECK_THROWS_AS(cheeger_ratio(ScalarField(4, 4)), std::invalid_argument);
  ScalarField m(4, 4);
  m[3] = 0.5;
  CHECK_THROWS_AS(cheeger_ratio(m), std::invalid_argument);
}

TEST_CASE("cheeger ratio decreases with disc size") {
  for (double r : {4.0, 6.0, 8.0, 12.0, 16.0, 24.0}) {
    const double big = cheeger_ratio(disc_mask(96, 96, {47.5, 47.5, r, 1.0}));
    const double half = cheeger_ratio(disc_mask(96, 96, {47.5, 47.5, r / 2.0, 1.0}));
    CAPTURE(r);
    CHECK(big < half);
  }
}

TEST_CASE("brute force trivial regimes") {
  const ScalarField f = test::random_binary(4, 4, 3);
  const BruteForceResult zero = brute_force_l1tv(f, 0.0);
  CHECK(zero.min_energy == 0.0);
  CHECK(zero.minimizer == f);

  const double ones = static_cast<double>(count_ones(f));
  const BruteForceResult large = brute_force_l1tv(f, 17.0);
  CHECK(large.min_energy == doctest::Approx(std::min(ones, 16.0 - ones)));
  const double first = large.minimizer[0];
  for (double v : large.minimizer.values()) CHECK(v == first);
}

TEST_CASE("brute force agrees with an independent enumeration") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (double alpha : {0.1, 0.3, 0.6, 1.0}) {
      const std::size_t w = seed % 2 == 0 ? 4 : 5;
      const std::size_t h = seed % 2 == 0 ? 4 : 3;
      const ScalarField f = test::random_binary(w, h, 100 + seed);
      const BruteForceResult mine = brute_force_l1tv(f, alpha);
      const BruteForceResult ref = gray_code_minimum(f, alpha);
      CAPTURE(seed);
      CAPTURE(alpha);
      CHECK(mine.min_energy == doctest::Approx(ref.min_energy).epsilon(1e-12));
      CHECK(mine.minimizer == ref.minimizer);
      CHECK(energy(mine.minimizer, f, alpha, Fidelity::L1).total == doctest::Approx(mine.min_energy));
    }
  }
}

TEST_CASE("brute force input limits") {
  CHECK_THROWS_AS(brute_force_l1tv(ScalarField(7, 3), 0.3), std::invalid_argument);
  CHECK_NOTHROW(brute_force_l1tv(ScalarField(5, 4), 0.3));
  ScalarField f(3, 3);
  f[0] = 0.5;
  CHECK_THROWS_AS(brute_force_l1tv(f, 0.3), std::invalid_argument);
}

TEST_CASE("solver reaches the exhaustive binary minimum") {
  const SolverConfig cfg = SolverConfig::paper_defaults().with_max_its(20000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ScalarField f = test::random_binary(4, 4, 500 + seed);
    for (double alpha : {0.1, 0.3, 0.6}) {
      const BruteForceResult oracle = brute_force_l1tv(f, alpha);
      const DenoiseResult r = solve_denoise(f, alpha, Fidelity::L1, cfg);
      CAPTURE(seed);
      CAPTURE(alpha);
      // Isotropic TV admits non-binary minimizers, so the solver may go lower.
      CHECK(r.report.total <= oracle.min_energy + 1e-3);
    }
  }
}

TEST_CASE("disc diagnostics") {
  const ScalarField mask = disc_mask(16, 16, {7.5, 7.5, 4.0, 1.0});
  ScalarField u(16, 16, 0.25);
  CHECK(plateau_height(u, mask) == doctest::Approx(0.25));
  CHECK_THROWS_AS(plateau_height(u, ScalarField(16, 16)), std::invalid_argument);

  const ScalarField f = 2.0 * mask;
  const std::vector<ScalarField> sols{f, 0.5 * f, 0.11 * f, 0.05 * f, ScalarField(16, 16)};
  CHECK(vanishing_stage(sols, f, mask) == std::optional<std::size_t>{3});
  CHECK(vanishing_stage(sols, f, mask, 0.02) == std::optional<std::size_t>{2});
  CHECK_FALSE(vanishing_stage(std::span(sols).first(2), f, mask).has_value());

  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 1, -1, -3};
  CHECK(fit_slope(x, y) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(fit_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("disc vanishing scale does not depend on contrast") {
  const std::size_t n = 64;
  const ScaleGrid grid = make_scale_grid(20, 1.0, 20.0, Spacing::Linear);
  std::vector<std::size_t> stages;
  for (double c : {0.25, 0.9}) {
    const Disc d{31.5, 31.5, 16.0, c};
    const ScalarField f = disc_phantom({n, n, 0.0, {d}});
    const ScaleSpace s = compute_scale_space(f, grid, Fidelity::L1, SolverConfig::test_profile());
    const std::optional<std::size_t> stage = vanishing_stage(s.solutions, f, disc_mask(n, n, d));
    REQUIRE(stage.has_value());
    stages.push_back(*stage);
    CHECK(std::abs(grid[*stage] - 8.0) <= 0.25 * 8.0);
  }
  CHECK(stages[0] == stages[1]);
}

TEST_CASE("L2 plateau decays with slope -2/r") {
  for (double r : {12.0, 16.0, 24.0}) {
    const std::size_t n = 128;
    const Disc d{63.5, 63.5, r, 1.0};
    const ScalarField f = disc_phantom({n, n, 0.0, {d}});
    const double vanish = d.contrast * r / 2.0;
    const ScaleGrid grid = make_scale_grid(12, vanish / 32.0, 0.6 * vanish, Spacing::Linear);
    const ScaleSpace s = compute_scale_space(f, grid, Fidelity::L2, SolverConfig::test_profile());
    const ScalarField mask = disc_mask(n, n, d);
    std::vector<double> heights;
    for (const ScalarField& u : s.solutions) heights.push_back(plateau_height(u, mask));
    const double slope = fit_slope(grid.values(), heights);
    CAPTURE(r);
    MESSAGE("r = " << r << ": slope " << slope << " vs " << -2.0 / r);
    CHECK(std::abs(slope + 2.0 / r) <= 0.1 * (2.0 / r));
  }
}

}  // TEST_SUITE

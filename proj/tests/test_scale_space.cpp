#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "spectv/phantoms.hpp"
#include "spectv/scale_space.hpp"
#include "support.hpp"

using namespace spectv;

namespace {

constexpr std::size_t kSize = 64;
const Disc kDisc{31.5, 31.5, 16.0, 1.0};

ScalarField disc_image() { return disc_phantom({kSize, kSize, 0.0, {kDisc}}); }

ScaleGrid disc_grid() { return make_scale_grid(20, 2.0, 20.0, Spacing::Linear); }

const ScaleSpace& l1_disc_space() {
  static const ScaleSpace s = compute_scale_space(disc_image(), disc_grid(), Fidelity::L1, SolverConfig::test_profile());
  return s;
}

// L2 preserves the mean under Neumann boundaries, so the vanished disc leaves
// mean(f) behind; the larger domain keeps that below the plateau tolerance.
constexpr std::size_t kL2Size = 128;
const Disc kL2Disc{63.5, 63.5, 16.0, 1.0};

const ScaleSpace& l2_disc_space() {
  static const ScaleSpace s = compute_scale_space(disc_phantom({kL2Size, kL2Size, 0.0, {kL2Disc}}), disc_grid(),
                                                  Fidelity::L2, SolverConfig::test_profile());
  return s;
}

bool disc_vanished(const ScalarField& u, const ScalarField& f, const ScalarField& mask) {
  const std::vector<ScalarField> one{u};
  return vanishing_stage(one, f, mask).has_value();
}

}  // namespace

TEST_SUITE("scale_space") {

TEST_CASE("make_scale_grid examples") {
  const ScaleGrid lin = make_scale_grid(3, 1.0, 3.0, Spacing::Linear);
  CHECK(lin.values() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(lin.spacing() == Spacing::Linear);

  const ScaleGrid lg = make_scale_grid(3, 1.0, 4.0, Spacing::Logarithmic);
  REQUIRE(lg.size() == 3);
  CHECK(lg[0] == 1.0);
  CHECK(lg[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lg[2] == 4.0);

  const ScaleGrid twenty = make_scale_grid(20, 0.5, 40.0, Spacing::Linear);
  REQUIRE(twenty.size() == 20);
  CHECK(twenty[0] == 0.5);
  CHECK(twenty[19] == 40.0);
  const double step = (40.0 - 0.5) / 19.0;
  for (std::size_t i = 1; i < 20; ++i) CHECK(std::abs(twenty[i] - twenty[i - 1] - step) <= 1e-12);

  const ScaleGrid ratios = make_scale_grid(12, 0.1, 50.0, Spacing::Logarithmic);
  const double q = ratios[1] / ratios[0];
  for (std::size_t i = 1; i < 12; ++i) CHECK(ratios[i] / ratios[i - 1] == doctest::Approx(q).epsilon(1e-12));
  CHECK(ratios[11] == 50.0);
}

TEST_CASE("make_scale_grid and ScaleGrid reject invalid input") {
  CHECK_THROWS_AS(make_scale_grid(1, 1.0, 2.0, Spacing::Linear), std::invalid_argument);
  CHECK_THROWS_AS(make_scale_grid(5, 2.0, 2.0, Spacing::Linear), std::invalid_argument);
  CHECK_THROWS_AS(make_scale_grid(5, 3.0, 2.0, Spacing::Logarithmic), std::invalid_argument);
  CHECK_THROWS_AS(make_scale_grid(5, 0.0, 2.0, Spacing::Linear), std::invalid_argument);
  CHECK_THROWS_AS(ScaleGrid({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScaleGrid({1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScaleGrid({2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScaleGrid({-1.0, 1.0}), std::invalid_argument);
  CHECK_NOTHROW(ScaleGrid({0.5, 0.7, 3.0}));
}

TEST_CASE("spacing names") {
  CHECK(parse_spacing("linear") == Spacing::Linear);
  CHECK(parse_spacing("log") == Spacing::Logarithmic);
  CHECK(parse_spacing(to_string(Spacing::Logarithmic)) == Spacing::Logarithmic);
  CHECK_THROWS_AS(parse_spacing("cubic"), std::invalid_argument);
}

TEST_CASE("trapezoid weights integrate linear functions exactly") {
  const ScaleGrid g({0.5, 0.7, 1.5, 4.0, 4.25});
  const std::vector<double> w = g.trapezoid_weights();
  REQUIRE(w.size() == 5);
  double total = 0.0, first_moment = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    total += w[i];
    first_moment += w[i] * g[i];
  }
  CHECK(total == doctest::Approx(4.25 - 0.5).epsilon(1e-14));
  CHECK(first_moment == doctest::Approx((4.25 * 4.25 - 0.25) / 2.0).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(0.1));
  CHECK(w[2] == doctest::Approx((4.0 - 0.7) / 2.0));
}

TEST_CASE("field checksum tracks values and shape") {
  const ScalarField a = test::random_field(5, 4, 3);
  ScalarField b = a;
  CHECK(field_checksum(a) == field_checksum(b));
  b[7] += 1e-15;
  CHECK(field_checksum(a) != field_checksum(b));
  const ScalarField c(4, 5, std::vector<double>(a.values().begin(), a.values().end()));
  CHECK(field_checksum(a) != field_checksum(c));
}

TEST_CASE("constant image is a fixed point of every stage") {
  const ScalarField f(12, 9, 0.37);
  const ScaleGrid grid = make_scale_grid(6, 0.5, 8.0, Spacing::Linear);
  for (Fidelity fid : {Fidelity::L1, Fidelity::L2}) {
    const ScaleSpace s = compute_scale_space(f, grid, fid, SolverConfig::test_profile());
    REQUIRE(s.solutions.size() == grid.size());
    REQUIRE(s.reports.size() == grid.size());
    CHECK(s.fidelity == fid);
    CHECK(s.source_checksum == field_checksum(f));
    for (const ScalarField& u : s.solutions) CHECK(max_abs_difference(u, f) <= 1e-12);
  }
}

TEST_CASE("L1 disc vanishes at the discrete threshold of the solver") {
  const ScalarField f = disc_image();
  const ScalarField mask = disc_mask(kSize, kSize, kDisc);
  const ScaleSpace& s = l1_disc_space();
  const std::optional<std::size_t> stage = vanishing_stage(s.solutions, f, mask);
  REQUIRE(stage.has_value());

  // Bisection on alpha with single solves started like stage 0.
  const SolverConfig cfg = SolverConfig::test_profile().with_max_its(20000);
  auto vanished_at = [&](double alpha) {
    const DenoiseResult r = solve_denoise(f, alpha, Fidelity::L1, cfg, WarmStart{f, VectorField(kSize, kSize)});
    return disc_vanished(r.u, f, mask);
  };
  double lo = 2.0, hi = 20.0;
  REQUIRE_FALSE(vanished_at(lo));
  REQUIRE(vanished_at(hi));
  for (int k = 0; k < 8; ++k) {
    const double mid = 0.5 * (lo + hi);
    (vanished_at(mid) ? hi : lo) = mid;
  }
  const double step = s.grid[1] - s.grid[0];
  const double t_vanish = s.grid[*stage];
  MESSAGE("sweep vanishing t = " << t_vanish << ", bisection threshold = " << hi);
  CHECK(std::abs(t_vanish - hi) <= step);
  CHECK(t_vanish >= 0.75 * kDisc.radius / 2.0);
  CHECK(t_vanish <= 1.25 * kDisc.radius / 2.0);
}

TEST_CASE("L1 disc solutions equal f before and zero after the transition") {
  const ScalarField f = disc_image();
  const ScaleSpace& s = l1_disc_space();
  const std::size_t stage = *vanishing_stage(s.solutions, f, disc_mask(kSize, kSize, kDisc));
  const ScalarField inner = disc_mask(kSize, kSize, {kDisc.center_x, kDisc.center_y, kDisc.radius - 2.0, 1.0});
  const ScalarField outer = disc_mask(kSize, kSize, {kDisc.center_x, kDisc.center_y, kDisc.radius + 2.0, 1.0});
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    if (i + 1 >= stage && i <= stage) continue;  // critical step
    const double target = i < stage ? 1.0 : 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (inner[k] == 1.0) worst = std::max(worst, std::abs(s.solutions[i][k] - target));
      if (outer[k] == 0.0) worst = std::max(worst, std::abs(s.solutions[i][k]));
    }
    CAPTURE(i);
    CHECK(worst <= 0.02);
  }
}

TEST_CASE("L2 disc plateau follows the closed-form decay") {
  const ScalarField mask = disc_mask(kL2Size, kL2Size, kL2Disc);
  const ScaleSpace& s = l2_disc_space();
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    CAPTURE(i);
    const double expected = oracle_l2_disc(kDisc.contrast, kDisc.radius, s.grid[i]);
    CHECK(std::abs(plateau_height(s.solutions[i], mask) - expected) <= 0.05);
  }
}

TEST_CASE("TV of the solutions decreases along the sweep") {
  for (const ScaleSpace* s : {&l1_disc_space(), &l2_disc_space()}) {
    // Slack relative to the input's TV: once the disc is gone the solutions
    // carry only solver residue of order 1e-5.
    const double slack = 1e-4 * tv_energy(s->solutions.front());
    for (std::size_t i = 1; i < s->solutions.size(); ++i) {
      CHECK(tv_energy(s->solutions[i]) <= tv_energy(s->solutions[i - 1]) + slack);
    }
  }
}

TEST_CASE("report terms are monotone in the scale index") {
  const ScalarField f = disc_phantom({40, 40, 0.1, {{12.0, 14.0, 6.0, 0.8}, {27.0, 25.0, 9.0, 0.5}}});
  const ScaleGrid grid = make_scale_grid(8, 0.5, 8.0, Spacing::Linear);
  for (Fidelity fid : {Fidelity::L1, Fidelity::L2}) {
    const ScaleSpace s = compute_scale_space(f, grid, fid, SolverConfig::test_profile());
    // tv_term carries the alpha weight; compare the TV of the solutions.
    const double slack = 1e-6 * tv_energy(f);
    for (std::size_t i = 1; i < s.reports.size(); ++i) {
      CAPTURE(i);
      CHECK(s.reports[i].fidelity_term >= s.reports[i - 1].fidelity_term - slack);
      CHECK(s.reports[i].tv_term / grid[i] <= s.reports[i - 1].tv_term / grid[i - 1] + slack);
    }
  }
}

TEST_CASE("cold recomputation of a stage reaches the same energy") {
  const ScalarField f = disc_phantom({40, 40, 0.0, {{12.0, 14.0, 6.0, 1.0}, {27.0, 25.0, 9.0, 0.5}}});
  const ScaleGrid grid = make_scale_grid(6, 1.0, 6.0, Spacing::Linear);
  for (Fidelity fid : {Fidelity::L1, Fidelity::L2}) {
    const ScaleSpace s = compute_scale_space(f, grid, fid, SolverConfig::test_profile());
    for (std::size_t i : {std::size_t{1}, std::size_t{3}, std::size_t{5}}) {
      const DenoiseResult cold = solve_denoise(f, grid[i], fid, SolverConfig::test_profile().with_max_its(20000));
      const double warm_e = energy(s.solutions[i], f, grid[i], fid).total;
      CAPTURE(i);
      CHECK(std::abs(cold.report.total - warm_e) <= 1e-4 * warm_e);
    }
  }
}

TEST_CASE("divergence inside a sweep reports the stage") {
  ScalarField f(6, 6, 0.0);
  f[4] = std::numeric_limits<double>::quiet_NaN();
  const ScaleGrid grid({1.0, 2.0});
  try {
    compute_scale_space(f, grid, Fidelity::L2, SolverConfig::test_profile());
    FAIL("expected divergence");
  } catch (const StageDivergenceError& e) {
    CHECK(e.stage() == 0);
  }
}

}  // TEST_SUITE

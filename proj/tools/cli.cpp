#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spectv/analysis.hpp"
#include "spectv/io.hpp"
#include "spectv/phantoms.hpp"
#include "spectv/scale_space.hpp"
#include "spectv/spectral.hpp"

namespace spectv::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct GridOptions {
  std::string fidelity = "l1";
  std::size_t n_scales = 20;
  double t_min = 0.5;
  std::optional<double> t_max;
  std::string spacing = "linear";
  std::string profile = "paper";
  std::optional<double> tau, sigma, theta, tol;
  std::optional<std::size_t> max_its;
  std::uint64_t seed = 0;
};

void add_solver_options(CLI::App& cmd, GridOptions& o) {
  cmd.add_option("--profile", o.profile, "Solver profile: paper (50000 its) or test (5000 its, tol 1e-8)")
      ->check(CLI::IsMember({"paper", "test"}));
  cmd.add_option("--tau", o.tau, "Primal step size");
  cmd.add_option("--sigma", o.sigma, "Dual step size");
  cmd.add_option("--theta", o.theta, "Extrapolation weight in [0,1]");
  cmd.add_option("--max-its", o.max_its, "Iterations per scale");
  cmd.add_option("--tol", o.tol, "Relative change for early stopping (0 disables)");
}

void add_grid_options(CLI::App& cmd, GridOptions& o) {
  cmd.add_option("--n-scales", o.n_scales, "Number of regularization parameters")->check(CLI::Range(2, 100000));
  cmd.add_option("--t-min", o.t_min, "Smallest regularization parameter");
  cmd.add_option("--t-max", o.t_max, "Largest regularization parameter (default 1.25*max(w,h)/4)");
  cmd.add_option("--spacing", o.spacing, "linear or logarithmic")->check(CLI::IsMember({"linear", "logarithmic"}));
  cmd.add_option("--seed", o.seed, "Recorded in run_config.txt");
  add_solver_options(cmd, o);
}

SolverConfig solver_from(const GridOptions& o) {
  const SolverConfig base = o.profile == "test" ? SolverConfig::test_profile() : SolverConfig::paper_defaults();
  try {
    return SolverConfig(o.tau.value_or(base.tau()), o.sigma.value_or(base.sigma()), o.theta.value_or(base.theta()),
                        o.max_its.value_or(base.max_its()), o.tol.value_or(base.rel_tol()));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

RunConfig run_config_from(const GridOptions& o, const std::string& input, const ScalarField& f) {
  RunConfig c;
  c.input = input;
  try {
    c.fidelity = parse_fidelity(o.fidelity);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.n_scales = o.n_scales;
  c.t_min = o.t_min;
  c.t_max = o.t_max.value_or(default_t_max(f.width(), f.height()));
  c.spacing = parse_spacing(o.spacing);
  c.profile = o.profile;
  c.solver = solver_from(o);
  c.seed = o.seed;
  return c;
}

ScaleGrid grid_from(const RunConfig& c) {
  try {
    return make_scale_grid(c.n_scales, c.t_min, c.t_max, c.spacing);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void parse_band_selector(const std::string& selector, RunConfig& c) {
  if (selector == "auto" || selector == "peaks") {
    c.band_method = BandMethod::Peaks;
  } else if (selector == "otsu") {
    c.band_method = BandMethod::Otsu;
  } else if (selector.rfind("manual:", 0) == 0) {
    c.band_method = BandMethod::Manual;
    try {
      c.band_params.manual = parse_intervals(selector.substr(7));
    } catch (const FormatError& e) {
      throw UsageError(e.what());
    }
    if (c.band_params.manual.empty()) throw UsageError("manual band list is empty");
  } else {
    throw UsageError("--bands expects auto, otsu or manual:<i0-i1,...>");
  }
}

std::vector<Band> bands_for(const SpectralDecomposition& dec, const RunConfig& c) {
  try {
    return cluster_bands(dec.response, c.band_method, c.band_params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string fmt(double v, int precision = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_phantom(const fs::path& spec_path, const fs::path& out_path, unsigned maxval, std::ostream& out) {
  const PhantomSpec spec = read_phantom_spec(spec_path);
  write_pgm(out_path, disc_phantom(spec), maxval);
  out << "wrote " << out_path.string() << " (" << spec.width << "x" << spec.height << ", " << spec.discs.size()
      << " discs)\n";
  return kSuccess;
}

int cmd_decompose(const GridOptions& o, const std::string& input, const fs::path& out_dir, std::ostream& out) {
  const ScalarField f = read_image(input);
  RunConfig config = run_config_from(o, input, f);
  config.output_dir = out_dir;
  const ScaleGrid grid = grid_from(config);
  const ScaleSpace space = compute_scale_space(f, grid, config.fidelity, config.solver);
  const SpectralDecomposition dec = transform(space, f);
  write_outputs(out_dir, dec, f, {}, {}, config);
  save_decomposition(out_dir / "decomposition.bin", dec, f);
  out << "decomposed " << input << " (" << f.width() << "x" << f.height() << ", " << to_string(config.fidelity)
      << ", " << grid.size() << " scales) into " << out_dir.string() << "\n";
  return kSuccess;
}

struct LoadedRun {
  StoredDecomposition stored;
  RunConfig config;
};

LoadedRun load_run(const fs::path& dir) {
  LoadedRun run{load_decomposition(dir / "decomposition.bin"), {}};
  const fs::path cfg = dir / "run_config.txt";
  if (fs::exists(cfg)) {
    std::ifstream in(cfg, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    run.config = parse_run_config(ss.str());
  }
  return run;
}

int cmd_filter(const fs::path& dir, const std::string& selector, double min_prominence, std::optional<fs::path> out_dir,
               bool with_masks, std::optional<double> epsilon, std::ostream& out) {
  LoadedRun run = load_run(dir);
  parse_band_selector(selector, run.config);
  run.config.band_params.min_prominence = min_prominence;
  if (epsilon) run.config.epsilon_seg = *epsilon;
  const fs::path target = out_dir.value_or(dir);
  run.config.output_dir = target;
  const auto& dec = run.stored.dec;
  const std::vector<Band> bands = bands_for(dec, run.config);

  std::vector<ScalarField> masks;
  if (with_masks) {
    for (const Band& b : bands) masks.push_back(segment(dec, FilterSpec::band(dec.size(), b.start, b.end), run.config.epsilon_seg));
  }
  write_outputs(target, dec, run.stored.f, bands, masks, run.config);
  out << bands.size() << " band(s)";
  for (const Band& b : bands) out << " [" << b.label << ": " << b.start << "-" << b.end << "]";
  out << " written to " << target.string() << "\n";
  return kSuccess;
}

int cmd_oracle_check(double r, double c, const std::string& fidelity_name, std::size_t size, const GridOptions& o,
                     std::ostream& out) {
  Fidelity fidelity;
  try {
    fidelity = parse_fidelity(fidelity_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(r >= 2.0)) throw UsageError("--r must be at least 2");
  if (!(c > 0.0)) throw UsageError("--c must be positive");
  if (static_cast<double>(size) < 2.0 * r + 4.0) throw UsageError("--size too small for the disc");

  const double center = (static_cast<double>(size) - 1.0) / 2.0;
  const Disc disc{center, center, r, c};
  const ScalarField f = disc_phantom({size, size, 0.0, {disc}});
  const ScalarField mask = disc_mask(size, size, disc);
  const SolverConfig solver = solver_from(o);

  if (fidelity == Fidelity::L1) {
    // t_i = (i+1) * r/16, so r/2 falls on index 7.
    const ScaleGrid grid = make_scale_grid(20, r / 16.0, 1.25 * r, Spacing::Linear);
    const ScaleSpace space = compute_scale_space(f, grid, fidelity, solver);
    const auto stage = vanishing_stage(space.solutions, f, mask);
    const double expected = r / 2.0;
    out << "fidelity l1  r " << fmt(r) << "  c " << fmt(c) << "\n";
    out << "closed-form vanishing scale r/2 = " << fmt(expected) << "\n";
    if (stage) {
      out << "measured vanishing stage " << *stage << " at t = " << fmt(grid[*stage]) << " (relative error "
          << fmt((grid[*stage] - expected) / expected, 3) << ")\n";
    } else {
      out << "measured vanishing stage none (disc survives the grid)\n";
    }
    return kSuccess;
  }

  // t_i = (i+1) * c*r/32; the slope is fitted where the closed form stays above 40% of c.
  const double vanish = c * r / 2.0;
  const ScaleGrid grid = make_scale_grid(20, vanish / 16.0, 1.25 * vanish, Spacing::Linear);
  const ScaleSpace space = compute_scale_space(f, grid, fidelity, solver);
  std::vector<double> ts, heights;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.6 * vanish) break;
    ts.push_back(grid[i]);
    heights.push_back(plateau_height(space.solutions[i], mask));
  }
  const double slope = fit_slope(ts, heights);
  const double expected = -2.0 / r;
  const auto stage = vanishing_stage(space.solutions, f, mask);
  out << "fidelity l2  r " << fmt(r) << "  c " << fmt(c) << "\n";
  out << "closed-form decay slope -2/r = " << fmt(expected) << "\n";
  out << "measured decay slope " << fmt(slope) << " (relative error " << fmt((slope - expected) / expected, 3)
      << ", " << ts.size() << " stages)\n";
  out << "closed-form vanishing scale c*r/2 = " << fmt(vanish) << "\n";
  if (stage) out << "measured vanishing stage " << *stage << " at t = " << fmt(grid[*stage]) << "\n";
  else out << "measured vanishing stage none (disc survives the grid)\n";
  return kSuccess;
}

int cmd_compare(const GridOptions& o, const std::string& input, double min_prominence, std::ostream& out) {
  const ScalarField f = read_image(input);
  RunConfig config = run_config_from(o, input, f);
  const ScaleGrid grid = grid_from(config);
  out << "scales " << grid.size() << " from " << fmt(grid[0]) << " to " << fmt(grid[grid.size() - 1]) << "\n";
  for (Fidelity fid : {Fidelity::L1, Fidelity::L2}) {
    const SpectralDecomposition dec = transform(compute_scale_space(f, grid, fid, config.solver), f);
    const std::vector<std::size_t> peaks = detect_peaks(dec.response, min_prominence);
    out << to_string(fid) << ": " << peaks.size() << " peak(s) at t =";
    for (std::size_t p : peaks) out << " " << fmt(grid[p]);
    out << "\n";
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral total-variation decomposition with L1 and L2 data fidelities", "spectv"};
  app.require_subcommand(1);

  std::string spec_path, phantom_out;
  unsigned phantom_maxval = 65535;
  auto* phantom = app.add_subcommand("phantom", "Render a disc phantom from a key = value spec file");
  phantom->add_option("--spec", spec_path, "Phantom spec file")->required();
  phantom->add_option("--out", phantom_out, "Output PGM")->required();
  phantom->add_option("--maxval", phantom_maxval, "PGM maxval")->check(CLI::Range(1u, 65535u));

  GridOptions decompose_opts;
  std::string decompose_input, decompose_out;
  auto* decompose = app.add_subcommand("decompose", "Scale-space, spectral transform and response.csv");
  decompose->add_option("--input", decompose_input, "Input image (PGM or PNG)")->required();
  decompose->add_option("--fidelity", decompose_opts.fidelity, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
  decompose->add_option("--out-dir", decompose_out, "Output directory")->required();
  add_grid_options(*decompose, decompose_opts);

  std::string filter_dir, filter_bands = "auto";
  double filter_prominence = 0.1;
  std::optional<std::string> filter_out;
  auto* filter = app.add_subcommand("filter", "Band reconstructions and color composite");
  filter->add_option("--decomp", filter_dir, "Directory written by decompose")->required();
  filter->add_option("--bands", filter_bands, "auto | otsu | manual:<i0-i1,...>");
  filter->add_option("--min-prominence", filter_prominence, "Peak prominence floor (fraction of max)");
  filter->add_option("--out-dir", filter_out, "Output directory (default: the decomposition directory)");

  std::string segment_dir, segment_bands = "auto";
  double segment_prominence = 0.1;
  double segment_epsilon = 1e-3;
  std::optional<std::string> segment_out;
  auto* seg = app.add_subcommand("segment", "Band masks");
  seg->add_option("--decomp", segment_dir, "Directory written by decompose")->required();
  seg->add_option("--bands", segment_bands, "auto | otsu | manual:<i0-i1,...>");
  seg->add_option("--epsilon", segment_epsilon, "Mask threshold")->check(CLI::NonNegativeNumber);
  seg->add_option("--min-prominence", segment_prominence, "Peak prominence floor (fraction of max)");
  seg->add_option("--out-dir", segment_out, "Output directory (default: the decomposition directory)");

  double oracle_r = 0.0, oracle_c = 0.0;
  std::string oracle_fidelity;
  std::size_t oracle_size = 128;
  GridOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle-check", "Compare a disc experiment with its closed-form solution");
  oracle->add_option("--r", oracle_r, "Disc radius in pixels")->required();
  oracle->add_option("--c", oracle_c, "Disc contrast")->required();
  oracle->add_option("--fidelity", oracle_fidelity, "l1 or l2")->required()->check(CLI::IsMember({"l1", "l2"}));
  oracle->add_option("--size", oracle_size, "Square image size");
  add_solver_options(*oracle, oracle_opts);

  GridOptions compare_opts;
  std::string compare_input;
  double compare_prominence = 0.1;
  auto* compare = app.add_subcommand("compare", "Peak counts and scales for both fidelities");
  compare->add_option("--input", compare_input, "Input image (PGM or PNG)")->required();
  compare->add_option("--min-prominence", compare_prominence, "Peak prominence floor (fraction of max)");
  add_grid_options(*compare, compare_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'spectv --help' for usage\n";
    return kUsage;
  }

  try {
    if (*phantom) return cmd_phantom(spec_path, phantom_out, phantom_maxval, out);
    if (*decompose) return cmd_decompose(decompose_opts, decompose_input, decompose_out, out);
    if (*filter) return cmd_filter(filter_dir, filter_bands, filter_prominence, filter_out, false, std::nullopt, out);
    if (*seg) return cmd_filter(segment_dir, segment_bands, segment_prominence, segment_out, true, segment_epsilon, out);
    if (*oracle) return cmd_oracle_check(oracle_r, oracle_c, oracle_fidelity, oracle_size, oracle_opts, out);
    if (*compare) return cmd_compare(compare_opts, compare_input, compare_prominence, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputFormat;
  } catch (const DivergenceError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsage;
}

}  // namespace spectv::cli

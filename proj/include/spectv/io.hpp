#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectv/analysis.hpp"
#include "spectv/phantoms.hpp"
#include "spectv/spectral.hpp"

namespace spectv {

/// Image or data file could not be interpreted.
class FormatError : public std::runtime_error {
public:
  enum class Kind { NotFound, UnknownFormat, Truncated, ZeroDimensions, Malformed };

  FormatError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Output could not be written.
class WriteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads PGM (P2/P5, 8 or 16 bit) or PNG (8/16 bit; color is converted to
/// gray). Values are divided by the format maximum.
ScalarField read_image(const std::filesystem::path& path);

/// Binary PGM (P5); values are clamped to [0,1] and rounded to maxval steps.
void write_pgm(const std::filesystem::path& path, const ScalarField& field, unsigned maxval = 255);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

struct RunConfig {
  std::string input;
  Fidelity fidelity = Fidelity::L1;
  std::size_t n_scales = 20;
  double t_min = 0.5;
  double t_max = 0.0;  // 0 selects the image-size default
  Spacing spacing = Spacing::Linear;
  std::string profile = "paper";
  SolverConfig solver = SolverConfig::paper_defaults();
  BandMethod band_method = BandMethod::Peaks;
  BandParams band_params;
  double epsilon_seg = 1e-3;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
};

/// Upper end of the default scale range for an image: 1.25 * max(w, h) / 4.
double default_t_max(std::size_t width, std::size_t height);

/// One `key = value` line per parameter, fixed order.
std::string format_run_config(const RunConfig& config);

/// Inverse of format_run_config; unknown keys are an error.
RunConfig parse_run_config(const std::string& text);

/// Parses `a-b,c-d` into inclusive index intervals.
std::vector<std::pair<std::size_t, std::size_t>> parse_intervals(const std::string& text);

/// `key = value` lines with `#` comments. Keys may repeat.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

/// width/height/background keys plus repeated `disc = cx,cy,r,c` lines.
PhantomSpec parse_phantom_spec(const std::string& text);
PhantomSpec read_phantom_spec(const std::filesystem::path& path);

/// `index,t_alpha,S_sq_raw,S_sq_clamped` (L1) or `index,t_alpha,S` (L2),
/// 12 significant digits, LF line endings.
std::string format_response_csv(const SpectralDecomposition& dec);

/// Full-precision spill of a decomposition and its source image, read back by
/// the filter and segment commands.
void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& dec, const ScalarField& f);

struct StoredDecomposition {
  SpectralDecomposition dec;
  ScalarField f;
};
StoredDecomposition load_decomposition(const std::filesystem::path& path);

/// Writes response.csv and run_config.txt, and for each band band_<label>.pgm
/// plus composite.ppm; masks[i] (if present) becomes mask_<label of band i>.pgm.
void write_outputs(const std::filesystem::path& dir, const SpectralDecomposition& dec, const ScalarField& f,
                   std::span<const Band> bands, std::span<const ScalarField> masks, const RunConfig& config);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace spectv

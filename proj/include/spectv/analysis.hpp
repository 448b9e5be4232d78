#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "spectv/spectral.hpp"

namespace spectv {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr std::array<Rgb, 8> kBandPalette = {{
    {1.0, 0.0, 0.0},
    {1.0, 0.55, 0.0},
    {1.0, 1.0, 0.0},
    {0.0, 0.8, 0.0},
    {0.0, 0.8, 1.0},
    {0.0, 0.0, 1.0},
    {0.6, 0.0, 1.0},
    {1.0, 0.0, 0.8},
}};

/// Inclusive interval of scale indices.
struct Band {
  std::size_t start = 0;
  std::size_t end = 0;
  int label = 0;
  Rgb color;
  friend bool operator==(const Band&, const Band&) = default;
};

enum class BandMethod { Peaks, Otsu, Manual };

std::string_view to_string(BandMethod m);

struct BandParams {
  double min_prominence = 0.1;
  std::vector<std::pair<std::size_t, std::size_t>> manual;
};

/// Interior strict local maxima (plateaus report their leftmost index) whose
/// prominence is at least min_prominence * max(response).
std::vector<std::size_t> detect_peaks(std::span<const double> response, double min_prominence);

/// Exhaustive Otsu split over the distinct response values. Values <= the
/// returned threshold form the lower class. NaN when all values are equal.
double otsu_threshold(std::span<const double> values);

/// Groups scale indices into disjoint, sorted bands.
///
/// Peaks: one band per peak, partitioning the whole index range. Neighbouring
/// peaks are split at the lowest index between them, which joins the left
/// band. A response without interior peaks but with positive mass yields one
/// band around its maximum. Otsu: maximal runs above the Otsu threshold. Manual: the given
/// intervals, validated.
std::vector<Band> cluster_bands(std::span<const double> response, BandMethod method, const BandParams& params = {});

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;
};

/// Hard color coding: each pixel takes the color of the band whose
/// reconstruction is largest there (if above epsilon), scaled by f.
RgbImage colorize_bands(const SpectralDecomposition& dec, std::span<const Band> bands, const ScalarField& f,
                        double epsilon = 1e-3);

}  // namespace spectv

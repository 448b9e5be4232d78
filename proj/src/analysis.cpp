#include "spectv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spectv {

namespace {

Band make_band(std::size_t start, std::size_t end, int label) {
  return {start, end, label, kBandPalette[static_cast<std::size_t>(label) % kBandPalette.size()]};
}

double max_value(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

std::vector<Band> peak_bands(std::span<const double> response, double min_prominence) {
  const std::size_t n = response.size();
  std::vector<Band> bands;
  if (n == 0) return bands;

  std::vector<std::size_t> peaks = detect_peaks(response, min_prominence);
  if (peaks.empty()) {
    if (!(max_value(response) > 0.0)) return bands;
    peaks.push_back(static_cast<std::size_t>(std::max_element(response.begin(), response.end()) - response.begin()));
  }

  std::size_t start = 0;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    std::size_t end = n - 1;
    if (k + 1 < peaks.size()) {
      auto first = response.begin() + static_cast<std::ptrdiff_t>(peaks[k] + 1);
      auto last = response.begin() + static_cast<std::ptrdiff_t>(peaks[k + 1]);
      end = static_cast<std::size_t>(std::min_element(first, last) - response.begin());
    }
    bands.push_back(make_band(start, end, static_cast<int>(k)));
    start = end + 1;
  }
  return bands;
}

std::vector<Band> otsu_bands(std::span<const double> response) {
  std::vector<Band> bands;
  const double thr = otsu_threshold(response);
  if (std::isnan(thr)) return bands;
  std::size_t i = 0;
  while (i < response.size()) {
    if (response[i] > thr) {
      std::size_t j = i;
      while (j + 1 < response.size() && response[j + 1] > thr) ++j;
      bands.push_back(make_band(i, j, static_cast<int>(bands.size())));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return bands;
}

std::vector<Band> manual_bands(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::vector<Band> bands;
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto [s, e] = intervals[k];
    if (s > e || e >= n)
      throw std::invalid_argument("manual band " + std::to_string(s) + "-" + std::to_string(e) +
                                  " is outside the scale range 0-" + std::to_string(n == 0 ? 0 : n - 1));
    if (k > 0 && s <= intervals[k - 1].second) throw std::invalid_argument("manual bands overlap");
    bands.push_back(make_band(s, e, static_cast<int>(k)));
  }
  return bands;
}

}  // namespace

std::string_view to_string(BandMethod m) {
  switch (m) {
    case BandMethod::Peaks: return "peaks";
    case BandMethod::Otsu: return "otsu";
    case BandMethod::Manual: return "manual";
  }
  return "peaks";
}

std::vector<std::size_t> detect_peaks(std::span<const double> response, double min_prominence) {
  std::vector<std::size_t> peaks;
  const std::size_t n = response.size();
  if (n < 3) return peaks;
  const double threshold = min_prominence * std::max(max_value(response), 0.0);

  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(response[i] > response[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && response[j + 1] == response[i]) ++j;
    if (j + 1 >= n || !(response[j + 1] < response[i])) {
      i = j + 1;
      continue;
    }
    const double v = response[i];
    double left_min = v;
    for (std::size_t k = i; k-- > 0;) {
      if (response[k] > v) break;
      left_min = std::min(left_min, response[k]);
    }
    double right_min = v;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (response[k] > v) break;
      right_min = std::min(right_min, response[k]);
    }
    if (v - std::max(left_min, right_min) >= threshold) peaks.push_back(i);
    i = j + 1;
  }
  return peaks;
}

double otsu_threshold(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (double v : sorted) total += v;

  double best = -1.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double below_sum = 0.0;
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    below_sum += sorted[k];
    if (sorted[k] == sorted[k + 1]) continue;
    const double w0 = static_cast<double>(k + 1) / n;
    const double w1 = 1.0 - w0;
    const double m0 = below_sum / static_cast<double>(k + 1);
    const double m1 = (total - below_sum) / (n - static_cast<double>(k + 1));
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      threshold = sorted[k];
    }
  }
  return threshold;
}

std::vector<Band> cluster_bands(std::span<const double> response, BandMethod method, const BandParams& params) {
  for (double v : response) {
    if (!std::isfinite(v)) throw std::invalid_argument("cluster_bands: non-finite response");
  }
  switch (method) {
    case BandMethod::Peaks: return peak_bands(response, params.min_prominence);
    case BandMethod::Otsu: return otsu_bands(response);
    case BandMethod::Manual: return manual_bands(response.size(), params.manual);
  }
  return {};
}

RgbImage colorize_bands(const SpectralDecomposition& dec, std::span<const Band> bands, const ScalarField& f,
                        double epsilon) {
  require_same_shape(dec.tail, f, "colorize_bands");
  RgbImage img{f.width(), f.height(), std::vector<Rgb>(f.size())};
  std::vector<ScalarField> layers;
  layers.reserve(bands.size());
  for (const Band& b : bands) layers.push_back(reconstruct(dec, FilterSpec::band(dec.size(), b.start, b.end)));

  for (std::size_t k = 0; k < f.size(); ++k) {
    double best = epsilon;
    const Band* winner = nullptr;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (layers[b][k] > best) {
        best = layers[b][k];
        winner = &bands[b];
      }
    }
    if (winner) img.pixels[k] = {winner->color.r * f[k], winner->color.g * f[k], winner->color.b * f[k]};
  }
  return img;
}

}  // namespace spectv

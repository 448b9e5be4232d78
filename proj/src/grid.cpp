#include "spectv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spectv {

ScalarField::ScalarField(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), values_(width * height, fill) {
  if (width == 0 || height == 0) throw std::invalid_argument("ScalarField: zero dimension");
}

ScalarField::ScalarField(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) throw std::invalid_argument("ScalarField: zero dimension");
  if (values_.size() != width * height)
    throw DimensionError("ScalarField: value count does not match width*height");
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField operator+(ScalarField lhs, const ScalarField& rhs) { return lhs += rhs; }
ScalarField operator-(ScalarField lhs, const ScalarField& rhs) { return lhs -= rhs; }
ScalarField operator*(double s, ScalarField rhs) { return rhs *= s; }

VectorField::VectorField(std::size_t w, std::size_t h) : width(w), height(h), x(w * h, 0.0), y(w * h, 0.0) {}

bool VectorField::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return x.size() == width * height && y.size() == x.size() && std::all_of(x.begin(), x.end(), finite) &&
         std::all_of(y.begin(), y.end(), finite);
}

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": incompatible fields " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

void gradient_into(std::span<const double> u, std::size_t width, std::size_t height, std::span<double> gx,
                   std::span<double> gy) {
  for (std::size_t r = 0; r < height; ++r) {
    const double* row = u.data() + r * width;
    const double* below = r + 1 < height ? row + width : nullptr;
    double* ox = gx.data() + r * width;
    double* oy = gy.data() + r * width;
    for (std::size_t c = 0; c + 1 < width; ++c) ox[c] = row[c + 1] - row[c];
    ox[width - 1] = 0.0;
    if (below) {
      for (std::size_t c = 0; c < width; ++c) oy[c] = below[c] - row[c];
    } else {
      for (std::size_t c = 0; c < width; ++c) oy[c] = 0.0;
    }
  }
}

void divergence_into(std::span<const double> gx, std::span<const double> gy, std::size_t width,
                     std::size_t height, std::span<double> out) {
  for (std::size_t r = 0; r < height; ++r) {
    const double* x = gx.data() + r * width;
    const double* y = gy.data() + r * width;
    const double* y_above = r > 0 ? y - width : nullptr;
    double* o = out.data() + r * width;
    for (std::size_t c = 0; c < width; ++c) {
      double dx = 0.0;
      if (width > 1) {
        if (c == 0) dx = x[0];
        else if (c + 1 == width) dx = -x[c - 1];
        else dx = x[c] - x[c - 1];
      }
      double dy = 0.0;
      if (height > 1) {
        if (r == 0) dy = y[c];
        else if (r + 1 == height) dy = -y_above[c];
        else dy = y[c] - y_above[c];
      }
      o[c] = dx + dy;
    }
  }
}

VectorField gradient(const ScalarField& u) {
  VectorField g(u.width(), u.height());
  gradient_into(u.values(), u.width(), u.height(), g.x, g.y);
  return g;
}

ScalarField divergence(const VectorField& g) {
  ScalarField out(g.width, g.height);
  divergence_into(g.x, g.y, g.width, g.height, out.values());
  return out;
}

double tv_energy(const ScalarField& u) {
  const VectorField g = gradient(u);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += std::hypot(g.x[i], g.y[i]);
  return sum;
}

double l1_norm(const ScalarField& u) {
  double sum = 0.0;
  for (double v : u.values()) sum += std::abs(v);
  return sum;
}

double l2_norm_sq(const ScalarField& u) {
  double sum = 0.0;
  for (double v : u.values()) sum += v * v;
  return sum;
}

double inner_product(const ScalarField& u, const ScalarField& v) {
  require_same_shape(u, v, "inner_product");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
  return sum;
}

double inner_product(const VectorField& a, const VectorField& b) {
  if (a.width != b.width || a.height != b.height) throw DimensionError("inner_product: incompatible vector fields");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a.x[i] * b.x[i] + a.y[i] * b.y[i];
  return sum;
}

double l1_distance(const ScalarField& u, const ScalarField& v) {
  require_same_shape(u, v, "l1_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += std::abs(u[i] - v[i]);
  return sum;
}

double mean(const ScalarField& u) {
  double sum = 0.0;
  for (double v : u.values()) sum += v;
  return sum / static_cast<double>(u.size());
}

double median(const ScalarField& u) {
  std::vector<double> tmp(u.values().begin(), u.values().end());
  auto mid = tmp.begin() + static_cast<std::ptrdiff_t>((tmp.size() - 1) / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  return *mid;
}

double max_abs_difference(const ScalarField& u, const ScalarField& v) {
  require_same_shape(u, v, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

double gradient_norm_sq_estimate(std::size_t width, std::size_t height, int iterations) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField v(width, height);
  for (double& x : v.values()) x = dist(rng);
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const double n = std::sqrt(l2_norm_sq(v));
    if (n == 0.0) return 0.0;
    v *= 1.0 / n;
    ScalarField w = divergence(gradient(v));
    w *= -1.0;
    lambda = inner_product(v, w);
    v = std::move(w);
  }
  return lambda;
}

}  // namespace spectv

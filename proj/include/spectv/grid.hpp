#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectv {

/// Raised when two fields that must share a grid do not.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 2D image. Index (row, col); row 0 is the top.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(std::size_t width, std::size_t height, double fill = 0.0);
  ScalarField(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const ScalarField& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& rhs);
  ScalarField& operator-=(const ScalarField& rhs);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double c);

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField lhs, const ScalarField& rhs);
ScalarField operator-(ScalarField lhs, const ScalarField& rhs);
ScalarField operator*(double s, ScalarField rhs);

/// Per-pixel 2-vector field (dual variable, gradients).
struct VectorField {
  VectorField() = default;
  VectorField(std::size_t width, std::size_t height);

  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
  bool same_shape(const ScalarField& f) const { return width == f.width() && height == f.height(); }
  bool all_finite() const;
};

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what);

// Forward differences, Neumann boundary: the last column has zero x-difference
// and the last row zero y-difference.
VectorField gradient(const ScalarField& u);
void gradient_into(std::span<const double> u, std::size_t width, std::size_t height,
                   std::span<double> gx, std::span<double> gy);

// Negative adjoint of gradient: <grad u, g> + <u, div g> == 0.
ScalarField divergence(const VectorField& g);
void divergence_into(std::span<const double> gx, std::span<const double> gy, std::size_t width,
                     std::size_t height, std::span<double> out);

/// Isotropic total variation: sum of pointwise gradient magnitudes.
double tv_energy(const ScalarField& u);

double l1_norm(const ScalarField& u);
double l2_norm_sq(const ScalarField& u);
double inner_product(const ScalarField& u, const ScalarField& v);
double inner_product(const VectorField& a, const VectorField& b);
double l1_distance(const ScalarField& u, const ScalarField& v);
double mean(const ScalarField& u);
/// Lower-midpoint median; always an attained value of u.
double median(const ScalarField& u);
double max_abs_difference(const ScalarField& u, const ScalarField& v);

/// Power-method estimate of the squared operator norm of gradient on a grid.
double gradient_norm_sq_estimate(std::size_t width, std::size_t height, int iterations = 200);

}  // namespace spectv

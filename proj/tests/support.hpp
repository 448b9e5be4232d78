#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "spectv/grid.hpp"

namespace spectv::test {

inline ScalarField random_field(std::size_t w, std::size_t h, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f(w, h);
  for (double& v : f.values()) v = dist(rng);
  return f;
}

inline VectorField random_vector_field(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  VectorField g(w, h);
  for (double& v : g.x) v = dist(rng);
  for (double& v : g.y) v = dist(rng);
  return g;
}

inline ScalarField random_binary(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  ScalarField f(w, h);
  for (double& v : f.values()) v = coin(rng) ? 1.0 : 0.0;
  return f;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spectv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace spectv::test

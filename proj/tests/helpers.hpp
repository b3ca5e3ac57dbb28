#pragma once

// Shared fixtures for the unit tests.

#include <random>
#include <string>
#include <vector>

#include "declsolve/corpus.hpp"
#include "declsolve/dense.hpp"
#include "declsolve/reformulate.hpp"

namespace testing_support {

inline declsolve::Dense random_dense(std::size_t rows, std::size_t cols, std::mt19937_64& gen,
                                     double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  declsolve::Dense d(rows, cols);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = n(gen);
  return d;
}

inline std::vector<double> random_vec(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return v;
}

/// Compiled default instance of a bundled or extra model.
inline declsolve::CompiledProblem compiled_default(const std::string& name, std::uint64_t seed = 1) {
  const auto model = declsolve::corpus::find_model(name);
  const auto g = declsolve::corpus::default_instance(name, seed);
  return declsolve::compile_model(model->text, g.data, g.sizes);
}

inline std::vector<std::string> all_model_names() {
  std::vector<std::string> out;
  for (const auto& m : declsolve::corpus::list_models()) out.emplace_back(m.name);
  for (const auto& m : declsolve::corpus::extra_models()) out.emplace_back(m.name);
  return out;
}

}  // namespace testing_support

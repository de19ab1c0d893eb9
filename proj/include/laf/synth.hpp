#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "laf/detail/random.hpp"
#include "laf/vecspace.hpp"

namespace laf {

/// Mixture of Gaussian blobs projected onto the unit sphere.
struct MixtureSpec {
  std::size_t n = 1000;
  std::size_t dim = 16;
  std::size_t components = 2;
  /// Per-coordinate standard deviation of a blob, relative to its unit-norm center.
  double spread = 0.15;
  /// Fraction of points drawn uniformly on the sphere instead of from a blob.
  double background = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset data;
  /// Generating component per point; -1 for background points.
  std::vector<int> component;
};

inline SyntheticData spherical_mixture(const MixtureSpec& spec) {
  if (spec.dim == 0 || spec.components == 0) throw InvalidArgument("mixture needs dim > 0 and components > 0");
  detail::Rng rng(spec.seed);
  auto unit = [&] {
    std::vector<double> v(spec.dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  };
  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < spec.components; ++c) centers.push_back(unit());

  SyntheticData out;
  std::vector<float> flat;
  flat.reserve(spec.n * spec.dim);
  const double sigma = spec.spread / std::sqrt(static_cast<double>(spec.dim));
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<double> v;
    if (spec.background > 0.0 && rng.uniform() < spec.background) {
      v = unit();
      out.component.push_back(-1);
    } else {
      const std::size_t c = rng.below(spec.components);
      v = centers[c];
      for (double& x : v) x += sigma * rng.normal();
      out.component.push_back(static_cast<int>(c));
    }
    for (double x : v) flat.push_back(static_cast<float>(x));
  }
  out.data = Dataset(spec.dim, std::move(flat), true);
  return out;
}

} // namespace laf

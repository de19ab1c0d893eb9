#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "laf/cardest.hpp"
#include "laf/dbscan.hpp"
#include "laf/synth.hpp"

namespace laf::testing {

/// Unit-circle points at the given angles (degrees).
inline Dataset circle(std::initializer_list<double> degrees) {
  std::vector<std::vector<double>> rows;
  for (double d : degrees) {
    const double r = d * std::numbers::pi / 180.0;
    rows.push_back({std::cos(r), std::sin(r)});
  }
  return Dataset::from_rows(rows);
}

/// The six-point worked example: 0, 5, 10, 120, 125 and 240 degrees.
inline Dataset six_point_circle() { return circle({0, 5, 10, 120, 125, 240}); }

/// Estimator driven by an arbitrary function of the point index; the point
/// is located by exact comparison against the dataset rows.
class ScriptedEstimator final : public CardinalityEstimator {
public:
  ScriptedEstimator(const Dataset& data, std::function<double(std::size_t, double)> fn)
      : data_(&data), fn_(std::move(fn)) {}
  std::size_t dim() const override { return data_->dim(); }
  std::string kind() const override { return "scripted"; }
  double predict(std::span<const float> point, double eps) const override {
    for (std::size_t i = 0; i < data_->size(); ++i) {
      if ((*data_)[i].data() == point.data()) return fn_(i, eps);
    }
    throw InvalidArgument("scripted estimator only answers for dataset rows");
  }

private:
  const Dataset* data_;
  std::function<double(std::size_t, double)> fn_;
};

/// Brute-force neighbor list by a plain double loop.
inline std::vector<std::size_t> naive_neighbors(const Dataset& d, DistanceMetric m, std::size_t p, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < d.size(); ++q) {
    double dist;
    if (m == DistanceMetric::cosine) {
      double dot = 0;
      for (std::size_t k = 0; k < d.dim(); ++k) dot += double(d[p][k]) * double(d[q][k]);
      dist = std::min(2.0, std::max(0.0, 1.0 - dot));
    } else {
      double s = 0;
      for (std::size_t k = 0; k < d.dim(); ++k) {
        const double x = double(d[p][k]) - double(d[q][k]);
        s += x * x;
      }
      dist = std::sqrt(s);
    }
    if (q == p || dist < eps) out.push_back(q);
  }
  return out;
}

/// Seeded random mixture for property tests.
inline Dataset random_mixture(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t components,
                              double spread, double background = 0.1) {
  MixtureSpec spec;
  spec.n = n;
  spec.dim = dim;
  spec.components = components;
  spec.spread = spread;
  spec.background = background;
  spec.seed = seed;
  return spherical_mixture(spec).data;
}

} // namespace laf::testing

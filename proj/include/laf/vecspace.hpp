#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "laf/error.hpp"

namespace laf {

/// How distances between two stored vectors are measured.
///
/// `euclidean_equivalent` is the L2 distance, which on unit vectors is a
/// monotone transform of the cosine distance (see cos_to_euclidean).
enum class DistanceMetric { cosine, euclidean_equivalent };

inline const char* to_string(DistanceMetric m) {
  return m == DistanceMetric::cosine ? "cosine" : "euclidean";
}

/// Dot product of two float vectors accumulated in double precision.
inline double dot(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return acc;
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

inline double l2_norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

/// Scales `v` to unit L2 norm. Throws InvalidArgument for the zero vector.
inline std::vector<double> normalize(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  const double norm = std::sqrt(acc);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("cannot normalize a zero or non-finite vector");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

inline std::vector<double> normalize(std::initializer_list<double> v) {
  return normalize(std::span<const double>(v.begin(), v.size()));
}

/// 1 - <u, v>, clamped into [0, 2] to absorb rounding.
inline double cosine_distance(std::span<const float> u, std::span<const float> v) {
  return std::clamp(1.0 - dot(u, v), 0.0, 2.0);
}

inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
  return std::clamp(1.0 - dot(u, v), 0.0, 2.0);
}

inline double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(acc);
}

inline double euclidean_distance(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Euclidean distance between unit vectors whose cosine distance is `d_cos`.
inline double cos_to_euclidean(double d_cos) {
  if (!(d_cos >= 0.0 && d_cos <= 2.0)) {
    throw InvalidArgument("cosine distance out of [0, 2]: " + std::to_string(d_cos));
  }
  return std::sqrt(2.0 * d_cos);
}

/// Inverse of cos_to_euclidean.
inline double euclidean_to_cos(double d_euc) {
  if (!(d_euc >= 0.0 && d_euc <= 2.0)) {
    throw InvalidArgument("euclidean distance out of [0, 2]: " + std::to_string(d_euc));
  }
  return 0.5 * d_euc * d_euc;
}

inline double distance(DistanceMetric m, std::span<const float> u, std::span<const float> v) {
  return m == DistanceMetric::cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

/// Immutable row-major collection of `size()` vectors of dimension `dim()`.
///
/// Vector i is stable for the lifetime of the object. Instances built with
/// `normalize = true` hold unit vectors (norm within 1e-6 of 1 in float).
class Dataset {
public:
  Dataset() = default;

  Dataset(std::size_t dim, std::vector<float> flat, bool normalize_rows = false)
      : dim_(dim), data_(std::move(flat)) {
    if (dim_ == 0) throw InvalidArgument("dataset dimension must be positive");
    if (data_.size() % dim_ != 0) {
      throw InvalidArgument("flat buffer size " + std::to_string(data_.size()) +
                            " is not a multiple of dim " + std::to_string(dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw InvalidArgument("non-finite component in vector " + std::to_string(i / dim_));
      }
    }
    if (normalize_rows) {
      for (std::size_t r = 0; r < size(); ++r) {
        float* row = data_.data() + r * dim_;
        const double norm = l2_norm({row, dim_});
        if (!(norm > 0.0)) {
          throw InvalidArgument("cannot normalize zero vector " + std::to_string(r));
        }
        for (std::size_t k = 0; k < dim_; ++k) {
          row[k] = static_cast<float>(static_cast<double>(row[k]) / norm);
        }
      }
    }
  }

  static Dataset from_rows(const std::vector<std::vector<double>>& rows, bool normalize_rows = false) {
    if (rows.empty()) throw InvalidArgument("cannot infer dimension of an empty row list");
    const std::size_t dim = rows.front().size();
    std::vector<float> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim) {
        throw InvalidArgument("row " + std::to_string(r) + " has dimension " +
                              std::to_string(rows[r].size()) + ", expected " + std::to_string(dim));
      }
      for (double x : rows[r]) flat.push_back(static_cast<float>(x));
    }
    return Dataset(dim, std::move(flat), normalize_rows);
  }

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const float> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  std::span<const float> at(std::size_t i) const {
    if (i >= size()) {
      throw InvalidArgument("point index " + std::to_string(i) + " out of range [0, " +
                            std::to_string(size()) + ")");
    }
    return (*this)[i];
  }

  std::span<const float> flat() const { return data_; }

  /// Rows `indices` in the given order, as a new dataset.
  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<float> flat;
    flat.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
      auto row = at(i);
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return Dataset(dim_, std::move(flat));
  }

private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

} // namespace laf

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "laf/vecspace.hpp"

namespace laf {

/// Exact linear-scan range search with an executed-query counter.
///
/// Membership is strict: q is a neighbor of p iff d(p, q) < eps, so p is
/// always in its own result. Results are sorted ascending by index.
///
/// The counter is atomic; counts are exact once all concurrent callers
/// have returned.
class RangeSearcher {
public:
  RangeSearcher(const Dataset& data, DistanceMetric metric, unsigned threads = 1)
      : data_(&data), metric_(metric), threads_(threads == 0 ? 1 : threads) {}

  RangeSearcher(const RangeSearcher&) = delete;
  RangeSearcher& operator=(const RangeSearcher&) = delete;

  const Dataset& dataset() const { return *data_; }
  DistanceMetric metric() const { return metric_; }

  std::vector<std::size_t> range_query(std::size_t p, double eps) {
    if (p >= data_->size()) {
      throw InvalidArgument("range query on invalid index " + std::to_string(p));
    }
    if (!(eps > 0.0)) throw InvalidArgument("range query radius must be positive");
    count_.fetch_add(1, std::memory_order_relaxed);
    return scan_impl((*data_)[p], eps, p);
  }

  std::uint64_t query_count() const { return count_.load(std::memory_order_relaxed); }
  void reset_count() { count_.store(0, std::memory_order_relaxed); }

  /// Uncounted scan around an arbitrary vector.
  std::vector<std::size_t> scan(std::span<const float> center, double eps) const {
    return scan_impl(center, eps, kNoSelf);
  }

  std::size_t scan_count(std::span<const float> center, double eps) const {
    return scan(center, eps).size();
  }

private:
  static constexpr std::size_t kParallelThreshold = 1 << 14;
  static constexpr std::size_t kNoSelf = static_cast<std::size_t>(-1);

  // `self` is reported regardless of rounding in its own distance.
  std::vector<std::size_t> scan_impl(std::span<const float> center, double eps, std::size_t self) const {
    const std::size_t n = data_->size();
    if (threads_ <= 1 || n < kParallelThreshold) return scan_range(center, eps, self, 0, n);

    // Chunks are concatenated in index order.
    const std::size_t chunks = threads_;
    std::vector<std::vector<std::size_t>> parts(chunks);
    {
      std::vector<std::jthread> workers;
      workers.reserve(chunks);
      for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = n * c / chunks;
        const std::size_t hi = n * (c + 1) / chunks;
        workers.emplace_back([&, c, lo, hi] { parts[c] = scan_range(center, eps, self, lo, hi); });
      }
    }
    std::vector<std::size_t> out;
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
  }

  std::vector<std::size_t> scan_range(std::span<const float> center, double eps, std::size_t self,
                                      std::size_t lo, std::size_t hi) const {
    std::vector<std::size_t> out;
    for (std::size_t q = lo; q < hi; ++q) {
      if (q == self || distance(metric_, center, (*data_)[q]) < eps) out.push_back(q);
    }
    return out;
  }

  const Dataset* data_;
  DistanceMetric metric_;
  unsigned threads_;
  std::atomic<std::uint64_t> count_{0};
};

} // namespace laf

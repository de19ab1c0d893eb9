#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laf/detail/binary_io.hpp"
#include "laf/detail/random.hpp"
#include "laf/mlp.hpp"
#include "laf/vecspace.hpp"

namespace laf {

/// Predicts how many points lie within cosine distance `eps` of `point`.
///
/// Implementations are immutable after construction and deterministic;
/// `predict` may be called concurrently.
class CardinalityEstimator {
public:
  virtual ~CardinalityEstimator() = default;

  /// Dimension of the points this estimator accepts.
  virtual std::size_t dim() const = 0;
  virtual std::string kind() const = 0;
  virtual double predict(std::span<const float> point, double eps) const = 0;

protected:
  void check_dim(std::span<const float> point) const {
    if (point.size() != dim()) {
      throw InvalidArgument(kind() + " estimator expects dimension " + std::to_string(dim()) +
                            ", got " + std::to_string(point.size()));
    }
  }
};

/// Exact cardinality by linear scan. Keeps its own call counter, separate
/// from any RangeSearcher.
///
/// With the euclidean metric the radius is converted back to chord length
/// and compared the same way a RangeSearcher on that metric would. A point
/// that is a row of the dataset always counts itself.
class OracleEstimator final : public CardinalityEstimator {
public:
  explicit OracleEstimator(const Dataset& data, DistanceMetric metric = DistanceMetric::cosine)
      : data_(&data), metric_(metric) {}

  std::size_t dim() const override { return data_->dim(); }
  std::string kind() const override { return "oracle"; }

  double predict(std::span<const float> point, double eps) const override {
    check_dim(point);
    calls_.fetch_add(1, std::memory_order_relaxed);
    const double radius = metric_ == DistanceMetric::cosine ? eps : std::sqrt(2.0 * eps);
    std::size_t count = 0;
    for (std::size_t q = 0; q < data_->size(); ++q) {
      const auto row = (*data_)[q];
      if (row.data() == point.data() || distance(metric_, point, row) < radius) ++count;
    }
    return static_cast<double>(count);
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

private:
  const Dataset* data_;
  DistanceMetric metric_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// Exact neighbor count of dataset point `p` (self included).
inline std::size_t oracle_predict(const Dataset& data, std::size_t p, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  return static_cast<std::size_t>(OracleEstimator(data).predict(data.at(p), eps));
}

/// Counts neighbors among a Bernoulli(rate) sample of the dataset and
/// scales by 1/rate, which is unbiased over the sampling seed.
class SampleEstimator final : public CardinalityEstimator {
public:
  SampleEstimator(const Dataset& data, double rate, std::uint64_t seed) : data_(&data), rate_(rate) {
    if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sample rate must be in (0, 1]");
    detail::Rng rng(seed);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (rate >= 1.0 || rng.uniform() < rate) sample_.push_back(i);
    }
  }

  std::size_t dim() const override { return data_->dim(); }
  std::string kind() const override { return "sample"; }
  double rate() const { return rate_; }
  std::span<const std::size_t> sample() const { return sample_; }

  double predict(std::span<const float> point, double eps) const override {
    check_dim(point);
    std::size_t count = 0;
    for (std::size_t q : sample_) {
      if (cosine_distance(point, (*data_)[q]) < eps) ++count;
    }
    return static_cast<double>(count) / rate_;
  }

private:
  const Dataset* data_;
  double rate_;
  std::vector<std::size_t> sample_;
};

/// Returns the same value for every input.
class ConstantEstimator final : public CardinalityEstimator {
public:
  ConstantEstimator(std::size_t dim, double value) : dim_(dim), value_(value) {}
  std::size_t dim() const override { return dim_; }
  std::string kind() const override { return "constant"; }
  double predict(std::span<const float> point, double) const override {
    check_dim(point);
    return value_;
  }

private:
  std::size_t dim_;
  double value_;
};

// ---------------------------------------------------------------------------
// Learned estimators

enum class EstimatorKind { oracle, sample, mlp, rmi };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
  case EstimatorKind::oracle: return "oracle";
  case EstimatorKind::sample: return "sample";
  case EstimatorKind::mlp: return "mlp";
  case EstimatorKind::rmi: return "rmi";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator_kind(const std::string& s) {
  if (s == "oracle") return EstimatorKind::oracle;
  if (s == "sample") return EstimatorKind::sample;
  if (s == "mlp") return EstimatorKind::mlp;
  if (s == "rmi") return EstimatorKind::rmi;
  throw InvalidArgument("unknown estimator kind '" + s + "'");
}

/// Defaults are the full-size architecture: hidden widths 512/512/256/128
/// over a 1/2/4 staged index. `desk_scale()` is the smaller configuration
/// used by tests and the CLI.
struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::rmi;
  double sample_rate = 0.1;
  std::vector<std::size_t> hidden_widths{512, 512, 256, 128};
  std::vector<std::size_t> stage_fanout{1, 2, 4};
  std::size_t epochs = 200;
  std::size_t batch_size = 512;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  static EstimatorConfig desk_scale(EstimatorKind kind = EstimatorKind::mlp) {
    EstimatorConfig c;
    c.kind = kind;
    c.hidden_widths = {64, 32};
    c.stage_fanout = {1, 2};
    return c;
  }

  /// Models per stage actually built: a plain MLP is a one-stage index.
  std::vector<std::size_t> stages() const {
    if (kind == EstimatorKind::mlp) return {1};
    return stage_fanout;
  }

  void validate() const {
    if (kind == EstimatorKind::sample && !(sample_rate > 0.0 && sample_rate <= 1.0)) {
      throw InvalidArgument("sample_rate must be in (0, 1]");
    }
    if (kind == EstimatorKind::mlp || kind == EstimatorKind::rmi) {
      for (std::size_t w : hidden_widths) {
        if (w == 0) throw InvalidArgument("hidden widths must be positive");
      }
      if (kind == EstimatorKind::rmi) {
        if (stage_fanout.empty()) throw InvalidArgument("rmi needs at least one stage");
        if (stage_fanout.front() != 1) throw InvalidArgument("rmi first stage must hold one model");
        for (std::size_t f : stage_fanout) {
          if (f == 0) throw InvalidArgument("stage sizes must be positive");
        }
      }
      if (epochs == 0 || batch_size == 0) throw InvalidArgument("epochs and batch size must be positive");
      if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidArgument("learning rate must be positive");
      }
    }
  }
};

/// One supervised example: the exact neighbor count of dataset point
/// `point` at cosine radius `eps`.
struct TrainingPair {
  std::size_t point = 0;
  double eps = 0.0;
  std::size_t true_count = 0;

  bool operator==(const TrainingPair&) const = default;
};

inline std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 9; ++i) t.push_back(i / 10.0);
  return t;
}

/// Exact counts for every (query point, threshold) combination, grouped by
/// point in the order given.
inline std::vector<TrainingPair> build_training_set(const Dataset& data,
                                                    std::span<const double> thresholds,
                                                    std::span<const std::size_t> query_points) {
  if (data.empty()) throw InvalidArgument("cannot build training pairs from an empty dataset");
  if (thresholds.empty()) throw InvalidArgument("threshold list is empty");
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 2.0)) {
      throw InvalidArgument("threshold " + std::to_string(t) + " outside (0, 2)");
    }
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(query_points.size() * thresholds.size());
  std::vector<double> dist(data.size());
  for (std::size_t p : query_points) {
    const auto center = data.at(p);
    for (std::size_t q = 0; q < data.size(); ++q) dist[q] = cosine_distance(center, data[q]);
    for (double t : thresholds) {
      std::size_t count = 0;
      for (double d : dist) count += d < t ? 1 : 0;
      pairs.push_back({p, t, count});
    }
  }
  return pairs;
}

/// All points, or a seeded uniform subset of `point_cap` of them.
inline std::vector<TrainingPair> build_training_set(const Dataset& data,
                                                    std::span<const double> thresholds,
                                                    std::optional<std::size_t> point_cap,
                                                    std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("cannot build training pairs from an empty dataset");
  std::vector<std::size_t> points;
  if (point_cap && *point_cap < data.size()) {
    points = detail::sample_without_replacement(data.size(), *point_cap, seed);
  } else {
    points.resize(data.size());
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = i;
  }
  return build_training_set(data, thresholds, points);
}

/// Seeded split of [0, n) into (train, test) index lists, each ascending.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw InvalidArgument("train fraction must be in (0, 1]");
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  auto train = detail::sample_without_replacement(n, n_train, seed);
  std::vector<std::size_t> test;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < train.size() && train[k] == i) {
      ++k;
    } else {
      test.push_back(i);
    }
  }
  return {std::move(train), std::move(test)};
}

/// Neural estimator: a plain MLP, or a staged recursive model index whose
/// stage-i model picks one model of stage i+1 and whose leaf emits the value.
///
/// Every model sees the point concatenated with eps and regresses
/// log(1 + count), standardised by the training mean/std.
class LearnedEstimator final : public CardinalityEstimator {
public:
  LearnedEstimator(EstimatorConfig config, std::size_t dim, std::vector<std::vector<Mlp>> stages,
                   float target_mean, float target_std, float route_scale)
      : config_(std::move(config)), dim_(dim), stages_(std::move(stages)), target_mean_(target_mean),
        target_std_(target_std), route_scale_(route_scale) {
    if (stages_.empty()) throw FormatError("estimator has no stages");
    for (const auto& stage : stages_) {
      if (stage.empty()) throw FormatError("estimator stage has no models");
      for (const auto& m : stage) {
        if (m.inputs() != dim_ + 1) throw FormatError("model input width does not match dimension");
      }
    }
  }

  std::size_t dim() const override { return dim_; }
  std::string kind() const override { return to_string(config_.kind); }
  const EstimatorConfig& config() const { return config_; }
  const std::vector<std::vector<Mlp>>& stages() const { return stages_; }
  float target_mean() const { return target_mean_; }
  float target_std() const { return target_std_; }
  float route_scale() const { return route_scale_; }

  double predict(std::span<const float> point, double eps) const override {
    const auto input = make_input(point, eps);
    const double log_count = destandardize(walk(input, nullptr));
    const double est = std::exp(log_count) - 1.0;
    return std::isfinite(est) ? std::max(0.0, est) : 0.0;
  }

  /// Index (within the last stage) of the model that answers this input.
  std::size_t leaf_index(std::span<const float> point, double eps) const {
    std::size_t leaf = 0;
    walk(make_input(point, eps), &leaf);
    return leaf;
  }

  /// Child index in a stage of `next_size` models for a standardised output.
  std::size_t route(float output, std::size_t next_size) const {
    return route_output(output, target_mean_, target_std_, route_scale_, next_size);
  }

  /// Scales the de-standardised output to [0, next_size) and floors it.
  static std::size_t route_output(float output, float mean, float stdev, float scale,
                                  std::size_t next_size) {
    const double log_count = static_cast<double>(output) * stdev + mean;
    const double frac = log_count / static_cast<double>(scale);
    const double pos = std::floor(frac * static_cast<double>(next_size));
    if (!(pos > 0.0)) return 0; // also catches NaN
    if (pos >= static_cast<double>(next_size)) return next_size - 1;
    return static_cast<std::size_t>(pos);
  }

  std::vector<float> make_input(std::span<const float> point, double eps) const {
    check_dim(point);
    std::vector<float> input(point.begin(), point.end());
    input.push_back(static_cast<float>(eps));
    return input;
  }

  double destandardize(float y) const {
    return static_cast<double>(y) * target_std_ + target_mean_;
  }

  // Model file layout (all integers and reals little-endian):
  //   "LAFC"  u8 version=1  u8 kind(2=mlp,3=rmi)  u8 0  u8 0
  //   u32 dim  u32 epochs  u32 batch_size  f32 learning_rate  u64 seed
  //   f32 target_mean  f32 target_std  f32 route_scale
  //   u32 #hidden  u32 width...
  //   u32 #stages  u32 models_in_stage...
  //   per model in stage order, per layer: u32 in  u32 out  f32 w[out*in]  f32 b[out]
  static constexpr char kMagic[4] = {'L', 'A', 'F', 'C'};
  static constexpr std::uint8_t kVersion = 1;

  void save(std::ostream& os) const {
    os.write(kMagic, 4);
    const char head[4] = {static_cast<char>(kVersion),
                          static_cast<char>(config_.kind == EstimatorKind::mlp ? 2 : 3), 0, 0};
    os.write(head, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(dim_));
    detail::put_u32(os, static_cast<std::uint32_t>(config_.epochs));
    detail::put_u32(os, static_cast<std::uint32_t>(config_.batch_size));
    detail::put_f32(os, static_cast<float>(config_.learning_rate));
    detail::put_u64(os, config_.seed);
    detail::put_f32(os, target_mean_);
    detail::put_f32(os, target_std_);
    detail::put_f32(os, route_scale_);
    detail::put_u32(os, static_cast<std::uint32_t>(config_.hidden_widths.size()));
    for (std::size_t w : config_.hidden_widths) detail::put_u32(os, static_cast<std::uint32_t>(w));
    detail::put_u32(os, static_cast<std::uint32_t>(stages_.size()));
    for (const auto& s : stages_) detail::put_u32(os, static_cast<std::uint32_t>(s.size()));
    for (const auto& stage : stages_) {
      for (const auto& model : stage) {
        for (const auto& layer : model.layers()) {
          detail::put_u32(os, static_cast<std::uint32_t>(layer.in));
          detail::put_u32(os, static_cast<std::uint32_t>(layer.out));
          for (float w : layer.weights) detail::put_f32(os, w);
          for (float b : layer.bias) detail::put_f32(os, b);
        }
      }
    }
    if (!os) throw Error("failed to write estimator model");
  }

  /// Reads a model; rejects it when `expected_dim` is given and differs.
  static LearnedEstimator load(std::istream& is, std::optional<std::size_t> expected_dim = {}) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
      throw FormatError("not an estimator model file (bad magic)");
    }
    char head[4];
    if (!is.read(head, 4)) throw FormatError("truncated model header");
    if (static_cast<std::uint8_t>(head[0]) != kVersion) {
      throw FormatError("unsupported model version " + std::to_string(static_cast<int>(head[0])));
    }
    EstimatorConfig cfg;
    if (head[1] == 2) {
      cfg.kind = EstimatorKind::mlp;
    } else if (head[1] == 3) {
      cfg.kind = EstimatorKind::rmi;
    } else {
      throw FormatError("unknown model kind byte " + std::to_string(static_cast<int>(head[1])));
    }
    const std::size_t dim = detail::get_u32(is, "dimension");
    if (expected_dim && *expected_dim != dim) {
      throw InvalidArgument("model dimension " + std::to_string(dim) + " does not match data dimension " +
                            std::to_string(*expected_dim));
    }
    cfg.epochs = detail::get_u32(is, "epochs");
    cfg.batch_size = detail::get_u32(is, "batch size");
    cfg.learning_rate = detail::get_f32(is, "learning rate");
    cfg.seed = detail::get_u64(is, "seed");
    const float mean = detail::get_f32(is, "target mean");
    const float stdev = detail::get_f32(is, "target std");
    const float scale = detail::get_f32(is, "route scale");
    const std::uint32_t n_hidden = detail::get_u32(is, "hidden count");
    if (n_hidden > 1024) throw FormatError("implausible hidden layer count");
    cfg.hidden_widths.clear();
    for (std::uint32_t i = 0; i < n_hidden; ++i) cfg.hidden_widths.push_back(detail::get_u32(is, "width"));
    const std::uint32_t n_stages = detail::get_u32(is, "stage count");
    if (n_stages == 0 || n_stages > 64) throw FormatError("implausible stage count");
    cfg.stage_fanout.clear();
    for (std::uint32_t i = 0; i < n_stages; ++i) cfg.stage_fanout.push_back(detail::get_u32(is, "stage size"));

    std::vector<std::vector<Mlp>> stages;
    for (std::size_t s : cfg.stage_fanout) {
      if (s == 0 || s > (1u << 20)) throw FormatError("implausible stage size");
      std::vector<Mlp> stage;
      for (std::size_t m = 0; m < s; ++m) {
        std::vector<Mlp::Layer> layers;
        for (std::uint32_t l = 0; l <= n_hidden; ++l) {
          Mlp::Layer layer;
          layer.in = detail::get_u32(is, "layer input width");
          layer.out = detail::get_u32(is, "layer output width");
          if (layer.in == 0 || layer.out == 0 || layer.in > (1u << 20) || layer.out > (1u << 20)) {
            throw FormatError("implausible layer shape");
          }
          layer.weights.resize(layer.in * layer.out);
          layer.bias.resize(layer.out);
          for (float& w : layer.weights) w = detail::get_f32(is, "weights");
          for (float& b : layer.bias) b = detail::get_f32(is, "bias");
          layers.push_back(std::move(layer));
        }
        stage.emplace_back(std::move(layers));
      }
      stages.push_back(std::move(stage));
    }
    return LearnedEstimator(std::move(cfg), dim, std::move(stages), mean, stdev, scale);
  }

  void save(const std::string& path) const;
  static LearnedEstimator load(const std::string& path, std::optional<std::size_t> expected_dim = {});

private:
  float walk(const std::vector<float>& input, std::size_t* leaf) const {
    std::size_t idx = 0;
    float y = 0.0f;
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      y = stages_[s][idx].forward(input);
      if (s + 1 < stages_.size()) idx = route(y, stages_[s + 1].size());
    }
    if (leaf) *leaf = idx;
    return y;
  }

  EstimatorConfig config_;
  std::size_t dim_;
  std::vector<std::vector<Mlp>> stages_;
  float target_mean_;
  float target_std_;
  float route_scale_;
};

struct TrainingLog {
  /// Mean standardised-space loss of the last epoch, per model in stage order.
  std::vector<double> final_losses;
  /// Loss of the root model.
  double final_loss() const { return final_losses.empty() ? 0.0 : final_losses.front(); }
};

/// Fits a learned estimator on `pairs` drawn from `data`.
///
/// Stage 0 trains on every pair. Each later stage trains model j on the
/// pairs the previous stage routes to j; a model that receives no pairs
/// inherits its parent's weights. Deterministic in (config, data, pairs).
inline LearnedEstimator train_learned(const EstimatorConfig& config, const Dataset& data,
                                      std::span<const TrainingPair> pairs, TrainingLog* log = nullptr) {
  config.validate();
  if (config.kind != EstimatorKind::mlp && config.kind != EstimatorKind::rmi) {
    throw InvalidArgument("train_learned needs an mlp or rmi configuration");
  }
  if (pairs.empty()) throw InvalidArgument("no training pairs");
  const std::size_t dim = data.dim();
  const std::size_t width = dim + 1;

  std::vector<float> inputs(pairs.size() * width);
  std::vector<double> log_targets(pairs.size());
  double sum = 0.0;
  double max_log = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto row = data.at(pairs[i].point);
    std::copy(row.begin(), row.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * width));
    inputs[i * width + dim] = static_cast<float>(pairs[i].eps);
    log_targets[i] = std::log1p(static_cast<double>(pairs[i].true_count));
    sum += log_targets[i];
    max_log = std::max(max_log, log_targets[i]);
  }
  const double mean = sum / static_cast<double>(pairs.size());
  double var = 0.0;
  for (double t : log_targets) var += (t - mean) * (t - mean);
  double stdev = std::sqrt(var / static_cast<double>(pairs.size()));
  if (!(stdev > 1e-6)) stdev = 1.0;
  const auto f_mean = static_cast<float>(mean);
  const auto f_std = static_cast<float>(stdev);
  const auto f_scale = static_cast<float>(max_log > 0.0 ? max_log : 1.0);

  std::vector<float> targets(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    targets[i] = static_cast<float>((log_targets[i] - f_mean) / f_std);
  }

  const auto sizes = config.stages();
  std::vector<std::vector<Mlp>> stages;
  // assignment[i] = model index, within the current stage, that owns pair i
  std::vector<std::size_t> assignment(pairs.size(), 0);

  std::uint64_t stream = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    std::vector<Mlp> stage;
    for (std::size_t m = 0; m < sizes[s]; ++m) {
      const std::uint64_t model_seed = detail::mix_seed(config.seed, stream++);
      std::vector<float> sub_in;
      std::vector<float> sub_t;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (assignment[i] != m) continue;
        sub_in.insert(sub_in.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * width),
                      inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * width));
        sub_t.push_back(targets[i]);
      }
      if (sub_t.empty()) {
        // parent: the previous-stage model covering the same output range
        const std::size_t parent = m * sizes[s - 1] / sizes[s];
        stage.push_back(stages[s - 1][parent]);
        if (log) log->final_losses.push_back(0.0);
        continue;
      }
      Mlp net(width, config.hidden_widths, model_seed);
      SgdOptions opt{config.epochs, config.batch_size, config.learning_rate,
                     detail::mix_seed(model_seed, 1)};
      try {
        const double loss = SgdTrainer::train(net, sub_in, sub_t, opt);
        if (log) log->final_losses.push_back(loss);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " (stage " + std::to_string(s) + ", model " +
                            std::to_string(m) + ")");
      }
      stage.push_back(std::move(net));
    }
    if (s + 1 < sizes.size()) {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const float y = stage[assignment[i]].forward(
            std::span<const float>(inputs.data() + i * width, width));
        assignment[i] = LearnedEstimator::route_output(y, f_mean, f_std, f_scale, sizes[s + 1]);
      }
    }
    stages.push_back(std::move(stage));
  }
  EstimatorConfig stored = config;
  stored.stage_fanout = sizes;
  return LearnedEstimator(std::move(stored), dim, std::move(stages), f_mean, f_std, f_scale);
}

/// Builds the estimator described by `config`. The oracle and sample kinds
/// need no pairs and reference `data`, which must outlive them.
inline std::unique_ptr<CardinalityEstimator> train(const EstimatorConfig& config, const Dataset& data,
                                                   std::span<const TrainingPair> pairs,
                                                   TrainingLog* log = nullptr) {
  config.validate();
  switch (config.kind) {
  case EstimatorKind::oracle: return std::make_unique<OracleEstimator>(data);
  case EstimatorKind::sample: return std::make_unique<SampleEstimator>(data, config.sample_rate, config.seed);
  default: return std::make_unique<LearnedEstimator>(train_learned(config, data, pairs, log));
  }
}

inline void LearnedEstimator::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path + " for writing");
  save(os);
}

inline LearnedEstimator LearnedEstimator::load(const std::string& path, std::optional<std::size_t> expected_dim) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open model file " + path);
  return load(is, expected_dim);
}

/// max(pred/truth, truth/pred), both floored at 1.
inline double q_error(double predicted, double truth) {
  const double p = std::max(1.0, predicted);
  const double t = std::max(1.0, truth);
  return std::max(p / t, t / p);
}

inline double mean_q_error(const CardinalityEstimator& est, const Dataset& data,
                           std::span<const TrainingPair> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) sum += q_error(est.predict(data.at(p.point), p.eps), static_cast<double>(p.true_count));
  return sum / static_cast<double>(pairs.size());
}

/// Mean q-error of always predicting the mean training count.
inline double constant_mean_q_error(std::span<const TrainingPair> train_pairs,
                                    std::span<const TrainingPair> eval_pairs) {
  if (train_pairs.empty() || eval_pairs.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& p : train_pairs) mean += static_cast<double>(p.true_count);
  mean /= static_cast<double>(train_pairs.size());
  double sum = 0.0;
  for (const auto& p : eval_pairs) sum += q_error(mean, static_cast<double>(p.true_count));
  return sum / static_cast<double>(eval_pairs.size());
}

} // namespace laf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "laf/detail/random.hpp"
#include "laf/error.hpp"

namespace laf {

/// Fully connected scalar regressor: ReLU hidden layers, identity output.
class Mlp {
public:
  /// Row-major `out x in` weights plus bias.
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<float> weights;
    std::vector<float> bias;

    bool operator==(const Layer&) const = default;
  };

  Mlp() = default;

  /// Network `inputs -> hidden... -> 1`: He-initialised hidden layers and
  /// a zero output layer, so an untrained network predicts exactly 0.
  Mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::uint64_t seed) {
    if (inputs == 0) throw InvalidArgument("network needs at least one input");
    detail::Rng rng(seed);
    std::size_t fan_in = inputs;
    auto add_layer = [&](std::size_t out, bool random) {
      if (out == 0) throw InvalidArgument("hidden layer width must be positive");
      Layer l{fan_in, out, std::vector<float>(fan_in * out, 0.0f), std::vector<float>(out, 0.0f)};
      if (random) {
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (float& w : l.weights) w = static_cast<float>(rng.normal() * scale);
      }
      layers_.push_back(std::move(l));
      fan_in = out;
    };
    for (std::size_t w : hidden) add_layer(w, true);
    add_layer(1, false);
  }

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty() || layers_.back().out != 1) {
      throw FormatError("network must end in a single output unit");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
        throw FormatError("layer " + std::to_string(i) + " has inconsistent shape");
      }
      if (i > 0 && layers_[i - 1].out != l.in) {
        throw FormatError("layer " + std::to_string(i) + " input width does not match");
      }
    }
  }

  std::size_t inputs() const { return layers_.empty() ? 0 : layers_.front().in; }
  const std::vector<Layer>& layers() const { return layers_; }

  float forward(std::span<const float> x) const {
    if (x.size() != inputs()) {
      throw InvalidArgument("network expects " + std::to_string(inputs()) + " inputs, got " +
                            std::to_string(x.size()));
    }
    std::vector<float> cur(x.begin(), x.end());
    std::vector<float> next;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const Layer& l = layers_[li];
      next.assign(l.out, 0.0f);
      for (std::size_t o = 0; o < l.out; ++o) {
        const float* w = l.weights.data() + o * l.in;
        float acc = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * cur[i];
        next[o] = (li + 1 < layers_.size() && acc < 0.0f) ? 0.0f : acc;
      }
      cur.swap(next);
    }
    return cur[0];
  }

  bool operator==(const Mlp&) const = default;

private:
  friend class SgdTrainer;
  std::vector<Layer> layers_;
};

struct SgdOptions {
  std::size_t epochs = 200;
  std::size_t batch_size = 512;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

/// Mini-batch SGD on mean squared error with seeded shuffling.
///
/// Inputs are rows of a flat `rows x net.inputs()` matrix. Single-threaded
/// and deterministic: identical arguments produce identical weights.
class SgdTrainer {
public:
  using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

  /// Returns the mean loss of the final epoch.
  static double train(Mlp& net, std::span<const float> inputs, std::span<const float> targets,
                      const SgdOptions& opt, const EpochCallback& on_epoch = {}) {
    const std::size_t width = net.inputs();
    const std::size_t rows = targets.size();
    if (rows == 0) throw InvalidArgument("no training rows");
    if (inputs.size() != rows * width) throw InvalidArgument("input matrix has wrong size");
    if (opt.epochs == 0 || opt.batch_size == 0 || !(opt.learning_rate > 0.0)) {
      throw InvalidArgument("epochs, batch size and learning rate must be positive");
    }

    auto& layers = net.layers_;
    const std::size_t depth = layers.size();
    std::vector<std::vector<float>> gw(depth), gb(depth), act(depth + 1), delta(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      gw[l].resize(layers[l].weights.size());
      gb[l].resize(layers[l].bias.size());
      act[l + 1].resize(layers[l].out);
      delta[l].resize(layers[l].out);
    }
    act[0].resize(width);

    std::vector<std::size_t> order(rows);
    for (std::size_t i = 0; i < rows; ++i) order[i] = i;
    detail::Rng rng(opt.seed);

    double epoch_loss = 0.0;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      epoch_loss = 0.0;
      for (std::size_t start = 0; start < rows; start += opt.batch_size) {
        const std::size_t stop = std::min(rows, start + opt.batch_size);
        for (std::size_t l = 0; l < depth; ++l) {
          std::fill(gw[l].begin(), gw[l].end(), 0.0f);
          std::fill(gb[l].begin(), gb[l].end(), 0.0f);
        }
        for (std::size_t k = start; k < stop; ++k) {
          const std::size_t r = order[k];
          std::copy_n(inputs.data() + r * width, width, act[0].begin());
          for (std::size_t l = 0; l < depth; ++l) {
            const auto& L = layers[l];
            for (std::size_t o = 0; o < L.out; ++o) {
              const float* w = L.weights.data() + o * L.in;
              float acc = L.bias[o];
              for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * act[l][i];
              act[l + 1][o] = (l + 1 < depth && acc < 0.0f) ? 0.0f : acc;
            }
          }
          const float err = act[depth][0] - targets[r];
          epoch_loss += static_cast<double>(err) * err;

          // d(err^2)/d(out) = 2 err
          delta[depth - 1][0] = 2.0f * err;
          for (std::size_t l = depth; l-- > 0;) {
            const auto& L = layers[l];
            for (std::size_t o = 0; o < L.out; ++o) {
              const float d = delta[l][o];
              if (d == 0.0f) continue;
              gb[l][o] += d;
              float* g = gw[l].data() + o * L.in;
              for (std::size_t i = 0; i < L.in; ++i) g[i] += d * act[l][i];
            }
            if (l == 0) break;
            auto& prev = delta[l - 1];
            std::fill(prev.begin(), prev.end(), 0.0f);
            for (std::size_t o = 0; o < L.out; ++o) {
              const float d = delta[l][o];
              if (d == 0.0f) continue;
              const float* w = L.weights.data() + o * L.in;
              for (std::size_t i = 0; i < L.in; ++i) prev[i] += d * w[i];
            }
            for (std::size_t i = 0; i < prev.size(); ++i) {
              if (act[l][i] <= 0.0f) prev[i] = 0.0f;
            }
          }
        }
        const float step = static_cast<float>(opt.learning_rate / static_cast<double>(stop - start));
        for (std::size_t l = 0; l < depth; ++l) {
          auto& L = layers[l];
          for (std::size_t i = 0; i < L.weights.size(); ++i) L.weights[i] -= step * gw[l][i];
          for (std::size_t i = 0; i < L.bias.size(); ++i) L.bias[i] -= step * gb[l][i];
        }
      }
      epoch_loss /= static_cast<double>(rows);
      if (!std::isfinite(epoch_loss)) {
        throw TrainingError("training loss became non-finite in epoch " + std::to_string(epoch + 1));
      }
      if (on_epoch) on_epoch(epoch + 1, epoch_loss);
    }
    return epoch_loss;
  }
};

} // namespace laf

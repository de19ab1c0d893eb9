#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "laf/cardest.hpp"
#include "laf/dbscan.hpp"
#include "laf/io.hpp"
#include "laf/laf.hpp"
#include "laf/metrics.hpp"
#include "laf/sampling.hpp"
#include "laf/synth.hpp"

namespace laf::app {

/// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kRuntimeError = 2;

enum class Algorithm { dbscan, laf_dbscan, dbscan_pp, laf_dbscan_pp };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "dbscan") return Algorithm::dbscan;
  if (s == "laf-dbscan") return Algorithm::laf_dbscan;
  if (s == "dbscan++") return Algorithm::dbscan_pp;
  if (s == "laf-dbscan++") return Algorithm::laf_dbscan_pp;
  throw InvalidArgument("unknown algorithm '" + s + "' (dbscan, laf-dbscan, dbscan++, laf-dbscan++)");
}

inline std::string to_string(Algorithm a) {
  switch (a) {
  case Algorithm::dbscan: return "dbscan";
  case Algorithm::laf_dbscan: return "laf-dbscan";
  case Algorithm::dbscan_pp: return "dbscan++";
  case Algorithm::laf_dbscan_pp: return "laf-dbscan++";
  }
  return "unknown";
}

inline bool uses_estimator_gate(Algorithm a) { return a == Algorithm::laf_dbscan || a == Algorithm::laf_dbscan_pp; }
inline bool is_sampled(Algorithm a) { return a == Algorithm::dbscan_pp || a == Algorithm::laf_dbscan_pp; }

/// Report formatting of reals (%.10g).
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Thread count from LAF_THREADS when set, else `fallback`.
inline unsigned thread_count(unsigned fallback) {
  if (const char* env = std::getenv("LAF_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return fallback == 0 ? 1 : fallback;
}

struct RunConfig {
  std::string algorithm = "dbscan";
  std::string input;
  std::string format; // csv | fvecs; empty = from extension
  bool normalize = true;
  double eps = 0.5;
  std::size_t tau = 5;
  double alpha = 1.0;
  std::string metric = "cosine";
  std::string estimator; // oracle | sample | mlp | rmi; required by laf-*
  std::string model;     // model file for mlp / rmi
  double sample_rate = 0.1;
  std::uint64_t estimator_seed = 0;
  std::optional<double> p;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  bool unbounded_assignment = false;
  bool random_merge = false;
  std::string output;
  std::string report;
  std::string truth;
  std::string noise_mode = "shared";
  bool timing = false;
  unsigned threads = 1;
};

struct RunOutcome {
  ClusterAssignment assignment;
  RunReport report;
  std::optional<double> effective_p;
  std::size_t sample_size = 0;
};

inline DistanceMetric parse_metric(const std::string& s) {
  if (s == "cosine") return DistanceMetric::cosine;
  if (s == "euclidean") return DistanceMetric::euclidean_equivalent;
  throw InvalidArgument("unknown metric '" + s + "' (cosine, euclidean)");
}

inline NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "shared") return NoiseMode::shared;
  if (s == "singleton") return NoiseMode::singleton;
  throw InvalidArgument("unknown noise mode '" + s + "' (shared, singleton)");
}

/// Checks flag combinations that do not need any file access.
inline void validate(const RunConfig& cfg) {
  const Algorithm algo = parse_algorithm(cfg.algorithm);
  if (cfg.input.empty()) throw InvalidArgument("--input is required");
  if (!cfg.format.empty()) parse_vector_format(cfg.format);
  parse_metric(cfg.metric);
  parse_noise_mode(cfg.noise_mode);
  ClusterParams{cfg.eps, cfg.tau, cfg.alpha, parse_metric(cfg.metric)}.validate();
  if (uses_estimator_gate(algo) && cfg.estimator.empty()) {
    throw InvalidArgument(to_string(algo) + " requires --estimator");
  }
  if (!cfg.estimator.empty()) {
    const auto kind = parse_estimator_kind(cfg.estimator);
    if ((kind == EstimatorKind::mlp || kind == EstimatorKind::rmi) && cfg.model.empty()) {
      throw InvalidArgument("estimator '" + cfg.estimator + "' requires --model");
    }
  }
  if (is_sampled(algo)) {
    if (!cfg.p && !cfg.delta) throw InvalidArgument(to_string(algo) + " requires --p or --delta");
    if (cfg.p && cfg.delta) throw InvalidArgument("--p and --delta are mutually exclusive");
    if (cfg.delta && cfg.estimator.empty()) {
      throw InvalidArgument("--delta derives p from predicted core points and requires --estimator");
    }
  }
}

/// Builds the estimator named in `cfg`; `data` must outlive it.
inline std::unique_ptr<CardinalityEstimator> make_estimator(const RunConfig& cfg, const Dataset& data) {
  switch (parse_estimator_kind(cfg.estimator)) {
  case EstimatorKind::oracle: return std::make_unique<OracleEstimator>(data, parse_metric(cfg.metric));
  case EstimatorKind::sample: return std::make_unique<SampleEstimator>(data, cfg.sample_rate, cfg.estimator_seed);
  default: return std::make_unique<LearnedEstimator>(LearnedEstimator::load(cfg.model, data.dim()));
  }
}

/// Runs the configured algorithm on an already loaded dataset.
inline RunOutcome cluster(const RunConfig& cfg, const Dataset& data, const CardinalityEstimator* estimator) {
  const Algorithm algo = parse_algorithm(cfg.algorithm);
  const ClusterParams params{cfg.eps, cfg.tau, cfg.alpha, parse_metric(cfg.metric)};
  RangeSearcher searcher(data, params.metric, cfg.threads);
  LafOptions laf_opt;
  laf_opt.merge.random_destination = cfg.random_merge;
  laf_opt.merge.seed = cfg.seed;
  SamplingParams sp;
  sp.p = cfg.p.value_or(1.0);
  sp.delta = cfg.delta.value_or(0.0);
  sp.auto_p = cfg.delta.has_value();
  sp.seed = cfg.seed;
  sp.bounded_assignment = !cfg.unbounded_assignment;

  RunOutcome out;
  switch (algo) {
  case Algorithm::dbscan: {
    const auto start = std::chrono::steady_clock::now();
    out.assignment = dbscan(searcher, params);
    out.report.wall_time = std::chrono::steady_clock::now() - start;
    out.report.executed_queries = searcher.query_count();
    break;
  }
  case Algorithm::laf_dbscan: {
    auto r = laf_dbscan(searcher, params, *estimator, laf_opt);
    out.assignment = std::move(r.assignment);
    out.report = r.report;
    break;
  }
  case Algorithm::dbscan_pp:
  case Algorithm::laf_dbscan_pp: {
    auto r = algo == Algorithm::dbscan_pp ? dbscan_pp(searcher, params, sp, estimator)
                                          : laf_dbscan_pp(searcher, params, sp, *estimator, laf_opt);
    out.assignment = std::move(r.assignment);
    out.report = r.report;
    out.effective_p = r.effective_p;
    out.sample_size = r.sampled.size();
    break;
  }
  }
  return out;
}

/// key=value report rows. Wall time is included only with `timing`.
inline std::string format_report(const RunConfig& cfg, const Dataset& data, const RunOutcome& out,
                                 const ClusterAssignment* truth) {
  std::ostringstream os;
  os << "algorithm=" << cfg.algorithm << '\n';
  os << "n=" << data.size() << '\n';
  os << "dim=" << data.dim() << '\n';
  os << "eps=" << fmt(cfg.eps) << '\n';
  os << "tau=" << cfg.tau << '\n';
  os << "alpha=" << fmt(cfg.alpha) << '\n';
  os << "estimator=" << (cfg.estimator.empty() ? "none" : cfg.estimator) << '\n';
  if (out.effective_p) {
    os << "effective_p=" << fmt(*out.effective_p) << '\n';
    os << "sample_size=" << out.sample_size << '\n';
  }
  os << "executed_queries=" << out.report.executed_queries << '\n';
  os << "skipped_queries=" << out.report.skipped_queries << '\n';
  os << "estimator_calls=" << out.report.estimator_calls << '\n';
  os << "merges_performed=" << out.report.merges_performed << '\n';
  os << "clusters=" << cluster_count(out.assignment) << '\n';
  os << "noise_ratio=" << fmt(noise_ratio(out.assignment)) << '\n';
  if (cfg.timing) os << "wall_time_ms=" << fmt(out.report.wall_ms()) << '\n';
  if (truth) {
    const NoiseMode mode = parse_noise_mode(cfg.noise_mode);
    const auto missed = missed_cluster_report(*truth, out.assignment);
    os << "ari=" << fmt(adjusted_rand_index(*truth, out.assignment, mode)) << '\n';
    os << "ami=" << fmt(adjusted_mutual_information(*truth, out.assignment, mode)) << '\n';
    os << "truth_clusters=" << cluster_count(*truth) << '\n';
    os << "truth_noise_ratio=" << fmt(noise_ratio(*truth)) << '\n';
    os << "missed_clusters=" << missed.missed_clusters << '\n';
    os << "total_clusters=" << missed.total_clusters << '\n';
    os << "missed_points=" << missed.missed_points << '\n';
    os << "clustered_points=" << missed.clustered_points << '\n';
    os << "avg_missed_size=" << fmt(missed.avg_missed_size) << '\n';
  }
  return os.str();
}

inline Dataset load_input(const std::string& path, const std::string& format, bool normalize) {
  const VectorFormat f = format.empty() ? format_from_path(path) : parse_vector_format(format);
  return load_dataset(path, f, normalize);
}

/// Maps library exceptions onto exit codes, printing the message to `err`.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

/// `run`: cluster a dataset and write labels plus a report.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const Dataset data = load_input(cfg.input, cfg.format, cfg.normalize);
    std::unique_ptr<CardinalityEstimator> est;
    if (!cfg.estimator.empty()) est = make_estimator(cfg, data);
    std::optional<ClusterAssignment> truth;
    if (!cfg.truth.empty()) {
      truth = load_labels(cfg.truth);
      if (truth->size() != data.size()) {
        throw InvalidArgument("ground truth has " + std::to_string(truth->size()) + " labels for " +
                              std::to_string(data.size()) + " points");
      }
    }
    const RunOutcome result = cluster(cfg, data, est.get());
    const std::string report = format_report(cfg, data, result, truth ? &*truth : nullptr);

    if (!cfg.output.empty()) save_labels(cfg.output, result.assignment);
    if (!cfg.report.empty()) {
      write_file_atomic(cfg.report, [&](std::ostream& os) { os << report; });
    }
    out << cfg.algorithm << ": " << data.size() << " points, " << cluster_count(result.assignment)
        << " clusters, noise ratio " << fmt(noise_ratio(result.assignment)) << '\n';
    out << "range queries executed " << result.report.executed_queries << ", skipped "
        << result.report.skipped_queries << ", wall time " << fmt(result.report.wall_ms()) << " ms\n";
    if (cfg.report.empty()) out << report;
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct TrainConfig {
  std::string input;
  std::string format;
  bool normalize = true;
  std::string thresholds_file; // empty = 0.1 .. 0.9 step 0.1
  std::string kind = "mlp";
  bool full_scale = false;
  std::vector<std::size_t> hidden_widths; // empty = per scale
  std::vector<std::size_t> stage_fanout;  // empty = per scale
  std::size_t epochs = 200;
  std::size_t batch_size = 512;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  double split = 0.8; // training fraction of the points
  std::optional<std::size_t> point_cap;
  std::string output;
};

inline EstimatorConfig estimator_config(const TrainConfig& cfg) {
  const auto kind = parse_estimator_kind(cfg.kind);
  if (kind != EstimatorKind::mlp && kind != EstimatorKind::rmi) {
    throw InvalidArgument("only mlp and rmi estimators are trained");
  }
  EstimatorConfig ec = cfg.full_scale ? EstimatorConfig{} : EstimatorConfig::desk_scale(kind);
  ec.kind = kind;
  if (!cfg.hidden_widths.empty()) ec.hidden_widths = cfg.hidden_widths;
  if (!cfg.stage_fanout.empty()) ec.stage_fanout = cfg.stage_fanout;
  ec.epochs = cfg.epochs;
  ec.batch_size = cfg.batch_size;
  ec.learning_rate = cfg.learning_rate;
  ec.seed = cfg.seed;
  ec.validate();
  return ec;
}

struct TrainOutcome {
  LearnedEstimator model;
  std::size_t train_pairs = 0;
  std::size_t heldout_pairs = 0;
  double final_loss = 0.0;
  double heldout_q_error = 0.0;
  double baseline_q_error = 0.0;
};

/// Splits the points, builds exact-count pairs for both sides (counts are
/// taken against the whole dataset) and trains on the training side.
inline TrainOutcome train_on(const TrainConfig& cfg, const Dataset& data) {
  const EstimatorConfig ec = estimator_config(cfg);
  const auto thresholds = cfg.thresholds_file.empty() ? default_thresholds() : load_thresholds(cfg.thresholds_file);
  auto [train_idx, test_idx] = split_indices(data.size(), cfg.split, detail::mix_seed(cfg.seed, 101));
  if (cfg.point_cap && train_idx.size() > *cfg.point_cap) {
    const auto keep = detail::sample_without_replacement(train_idx.size(), *cfg.point_cap,
                                                         detail::mix_seed(cfg.seed, 102));
    std::vector<std::size_t> capped;
    for (std::size_t k : keep) capped.push_back(train_idx[k]);
    train_idx = std::move(capped);
  }
  if (train_idx.empty()) throw InvalidArgument("training split selects no points");
  const auto train_pairs = build_training_set(data, thresholds, train_idx);
  const auto test_pairs = build_training_set(data, thresholds, test_idx);
  TrainingLog log;
  TrainOutcome out{train_learned(ec, data, train_pairs, &log)};
  out.train_pairs = train_pairs.size();
  out.heldout_pairs = test_pairs.size();
  out.final_loss = log.final_loss();
  out.heldout_q_error = mean_q_error(out.model, data, test_pairs);
  out.baseline_q_error = constant_mean_q_error(train_pairs, test_pairs);
  return out;
}

inline int train_estimator(const TrainConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.input.empty()) throw InvalidArgument("--input is required");
    if (cfg.output.empty()) throw InvalidArgument("--output is required");
    estimator_config(cfg);
    if (!cfg.format.empty()) parse_vector_format(cfg.format);
    const Dataset data = load_input(cfg.input, cfg.format, cfg.normalize);
    const auto r = train_on(cfg, data);
    write_file_atomic(cfg.output, [&](std::ostream& os) { r.model.save(os); });
    out << "pairs=" << (r.train_pairs + r.heldout_pairs) << '\n';
    out << "train_pairs=" << r.train_pairs << '\n';
    out << "heldout_pairs=" << r.heldout_pairs << '\n';
    out << "final_loss=" << fmt(r.final_loss) << '\n';
    if (r.heldout_pairs > 0) {
      out << "heldout_mean_q_error=" << fmt(r.heldout_q_error) << '\n';
      out << "constant_baseline_q_error=" << fmt(r.baseline_q_error) << '\n';
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------

enum class SweepKnob { alpha, delta };

struct SweepRow {
  double knob = 0.0;
  double wall_ms = 0.0;
  std::uint64_t executed_queries = 0;
  double ari = 0.0;
  double ami = 0.0;
};

/// One clustering run per knob value, scored against `truth`. Alpha
/// sweeps apply to laf-dbscan; delta sweeps to the sampled algorithms.
inline std::vector<SweepRow> tradeoff_sweep(const RunConfig& base, const Dataset& data,
                                            const ClusterAssignment& truth, const CardinalityEstimator* estimator,
                                            SweepKnob knob, const std::vector<double>& values) {
  const NoiseMode mode = parse_noise_mode(base.noise_mode);
  std::vector<SweepRow> rows;
  for (double v : values) {
    RunConfig cfg = base;
    if (knob == SweepKnob::alpha) {
      cfg.alpha = v;
    } else {
      cfg.delta = v;
      cfg.p.reset();
    }
    const auto r = cluster(cfg, data, estimator);
    rows.push_back({v, r.report.wall_ms(), r.report.executed_queries, adjusted_rand_index(truth, r.assignment, mode),
                    adjusted_mutual_information(truth, r.assignment, mode)});
  }
  return rows;
}

inline void write_sweep(std::ostream& os, SweepKnob knob, const std::vector<SweepRow>& rows, bool timing) {
  os << (knob == SweepKnob::alpha ? "alpha" : "delta") << ",wall_time_ms,executed_queries,ari,ami\n";
  for (const auto& r : rows) {
    os << fmt(r.knob) << ',' << (timing ? fmt(r.wall_ms) : std::string("na")) << ',' << r.executed_queries << ','
       << fmt(r.ari) << ',' << fmt(r.ami) << '\n';
  }
}

struct SweepConfig {
  RunConfig run;
  std::vector<double> alphas;
  std::vector<double> deltas;
};

inline int sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.alphas.empty() == cfg.deltas.empty()) throw InvalidArgument("give exactly one of --alphas or --deltas");
    const SweepKnob knob = cfg.alphas.empty() ? SweepKnob::delta : SweepKnob::alpha;
    RunConfig base = cfg.run;
    const Algorithm algo = parse_algorithm(base.algorithm);
    if (knob == SweepKnob::alpha && algo != Algorithm::laf_dbscan && algo != Algorithm::laf_dbscan_pp) {
      throw InvalidArgument("alpha sweeps need a laf-* algorithm");
    }
    if (knob == SweepKnob::delta && !is_sampled(algo)) throw InvalidArgument("delta sweeps need dbscan++ or laf-dbscan++");
    if (knob == SweepKnob::delta) {
      base.delta = cfg.deltas.front();
      base.p.reset();
    } else if (is_sampled(algo) && !base.p && !base.delta) {
      base.p = 1.0;
    }
    validate(base);
    const Dataset data = load_input(base.input, base.format, base.normalize);
    std::unique_ptr<CardinalityEstimator> est;
    if (!base.estimator.empty()) est = make_estimator(base, data);
    ClusterAssignment truth;
    if (!base.truth.empty()) {
      truth = load_labels(base.truth);
      if (truth.size() != data.size()) throw InvalidArgument("ground truth length does not match dataset");
    } else {
      truth = dbscan(data, ClusterParams{base.eps, base.tau, 1.0, parse_metric(base.metric)});
    }
    const auto rows = tradeoff_sweep(base, data, truth, est.get(), knob, knob == SweepKnob::alpha ? cfg.alphas : cfg.deltas);
    auto body = [&](std::ostream& os) { write_sweep(os, knob, rows, base.timing); };
    if (!base.output.empty()) {
      write_file_atomic(base.output, body);
    } else {
      body(out);
    }
    if (!base.output.empty()) {
      for (const auto& r : rows) {
        out << (knob == SweepKnob::alpha ? "alpha=" : "delta=") << fmt(r.knob) << " time=" << fmt(r.wall_ms)
            << "ms queries=" << r.executed_queries << " ari=" << fmt(r.ari) << " ami=" << fmt(r.ami) << '\n';
      }
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct GridConfig {
  std::string input;
  std::string format;
  bool normalize = true;
  std::string metric = "cosine";
  std::vector<double> eps_grid;
  std::vector<std::size_t> tau_grid;
  GridThresholds limits;
  std::string output;
  unsigned threads = 1;
};

inline void write_grid(std::ostream& os, const std::vector<GridCell>& cells) {
  os << "eps,tau,noise_ratio,clusters,qualifies\n";
  for (const auto& c : cells) {
    os << fmt(c.eps) << ',' << c.tau << ',' << fmt(c.noise_ratio) << ',' << c.cluster_count << ','
       << (c.qualifies ? 1 : 0) << '\n';
  }
}

inline int grid(const GridConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.input.empty()) throw InvalidArgument("--input is required");
    if (cfg.eps_grid.empty() || cfg.tau_grid.empty()) throw InvalidArgument("--eps-grid and --tau-grid are required");
    const DistanceMetric metric = parse_metric(cfg.metric);
    const Dataset data = load_input(cfg.input, cfg.format, cfg.normalize);
    const auto cells = parameter_grid_search(data, cfg.eps_grid, cfg.tau_grid, cfg.limits, metric, cfg.threads);
    if (cfg.output.empty()) {
      write_grid(out, cells);
    } else {
      write_file_atomic(cfg.output, [&](std::ostream& os) { write_grid(os, cells); });
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct GenConfig {
  MixtureSpec spec;
  std::string format; // empty = from extension
  std::string output;
  std::string components_output; // optional "index,label" file of generating components
};

inline int gen(const GenConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.output.empty()) throw InvalidArgument("--output is required");
    if (cfg.spec.n == 0) throw InvalidArgument("--n must be positive");
    const VectorFormat f = cfg.format.empty() ? format_from_path(cfg.output) : parse_vector_format(cfg.format);
    const auto synth = spherical_mixture(cfg.spec);
    write_file_atomic(cfg.output, [&](std::ostream& os) {
      if (f == VectorFormat::csv) {
        write_csv(os, synth.data);
      } else {
        write_fvecs(os, synth.data);
      }
    });
    if (!cfg.components_output.empty()) {
      ClusterAssignment c;
      for (int comp : synth.component) {
        c.labels.push_back(comp < 0 ? kNoise : comp + 1);
        c.num_clusters = std::max(c.num_clusters, c.labels.back());
      }
      save_labels(cfg.components_output, c);
    }
    out << "wrote " << synth.data.size() << " vectors of dimension " << synth.data.dim() << " to " << cfg.output
        << '\n';
    return kOk;
  });
}

} // namespace laf::app

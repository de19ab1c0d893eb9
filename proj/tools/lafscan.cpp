// lafscan: command-line front end for the clustering library.
//
//   lafscan gen    synthetic spherical mixtures
//   lafscan run    cluster a dataset (dbscan, laf-dbscan, dbscan++, laf-dbscan++)
//   lafscan train  train a learned cardinality estimator
//   lafscan sweep  speed/quality trade-off over alpha or delta
//   lafscan grid   (eps, tau) grid statistics
//
// LAF_THREADS overrides --threads. Exit codes: 0 ok, 1 config error, 2 runtime error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "laf/app.hpp"

namespace {

void add_input(CLI::App* cmd, std::string& input, std::string& format, bool& normalize) {
  cmd->add_option("--input", input, "Vector file (csv or fvecs)")->required();
  cmd->add_option("--format", format, "csv | fvecs (default: from extension)");
  cmd->add_flag("!--no-normalize", normalize, "Keep vectors as stored instead of L2-normalizing them");
}

void add_run_options(CLI::App* cmd, laf::app::RunConfig& c) {
  add_input(cmd, c.input, c.format, c.normalize);
  cmd->add_option("--algorithm", c.algorithm, "dbscan | laf-dbscan | dbscan++ | laf-dbscan++");
  cmd->add_option("--eps", c.eps, "Neighbor radius (strict)");
  cmd->add_option("--tau", c.tau, "Minimum neighbors, the point itself included");
  cmd->add_option("--alpha", c.alpha, "Estimator gate factor");
  cmd->add_option("--metric", c.metric, "cosine | euclidean");
  cmd->add_option("--estimator", c.estimator, "oracle | sample | mlp | rmi");
  cmd->add_option("--model", c.model, "Trained model file for mlp / rmi estimators");
  cmd->add_option("--sample-rate", c.sample_rate, "Sampling rate of the sample estimator");
  cmd->add_option("--estimator-seed", c.estimator_seed, "Seed of the sample estimator");
  cmd->add_option("--p", c.p, "DBSCAN++ sample fraction");
  cmd->add_option("--delta", c.delta, "DBSCAN++ offset: p = delta + predicted core ratio");
  cmd->add_option("--seed", c.seed, "Seed for sampling and random merge destinations");
  cmd->add_flag("--unbounded-assignment", c.unbounded_assignment,
                "DBSCAN++: attach every remaining point to its nearest core point, however far");
  cmd->add_flag("--random-merge", c.random_merge, "Pick merge destinations at random (seeded)");
  cmd->add_option("--output", c.output, "Output file");
  cmd->add_option("--truth", c.truth, "Ground-truth labels file for quality metrics");
  cmd->add_option("--noise-mode", c.noise_mode, "Noise handling in ARI/AMI: shared | singleton");
  cmd->add_flag("--timing", c.timing, "Write wall times into output files");
  cmd->add_option("--threads", c.threads, "Worker threads for range queries");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density clustering of unit vectors with learned range-query gating"};
  app.require_subcommand(1);

  laf::app::GenConfig gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a spherical Gaussian mixture");
  gen_cmd->add_option("--n", gen.spec.n, "Number of points");
  gen_cmd->add_option("--dim", gen.spec.dim, "Dimension");
  gen_cmd->add_option("--components", gen.spec.components, "Number of blobs");
  gen_cmd->add_option("--spread", gen.spec.spread, "Blob radius relative to the unit sphere");
  gen_cmd->add_option("--background", gen.spec.background, "Fraction of uniform background points");
  gen_cmd->add_option("--seed", gen.spec.seed, "Seed");
  gen_cmd->add_option("--format", gen.format, "csv | fvecs (default: from extension)");
  gen_cmd->add_option("--output", gen.output, "Output vector file")->required();
  gen_cmd->add_option("--components-output", gen.components_output, "Optional labels file of generating blobs");

  laf::app::RunConfig run;
  auto* run_cmd = app.add_subcommand("run", "Cluster a dataset");
  add_run_options(run_cmd, run);
  run_cmd->add_option("--report", run.report, "key=value report file");

  laf::app::TrainConfig train;
  auto* train_cmd = app.add_subcommand("train", "Train a cardinality estimator");
  add_input(train_cmd, train.input, train.format, train.normalize);
  train_cmd->add_option("--thresholds", train.thresholds_file, "File of cosine thresholds (default 0.1..0.9)");
  train_cmd->add_option("--kind", train.kind, "mlp | rmi");
  train_cmd->add_flag("--full-scale", train.full_scale, "Full-size layers (512,512,256,128) and stages (1,2,4)");
  train_cmd->add_option("--hidden", train.hidden_widths, "Hidden layer widths")->delimiter(',');
  train_cmd->add_option("--fanout", train.stage_fanout, "Models per RMI stage")->delimiter(',');
  train_cmd->add_option("--epochs", train.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch size");
  train_cmd->add_option("--lr", train.learning_rate, "SGD learning rate");
  train_cmd->add_option("--seed", train.seed, "Seed for split, initialisation and shuffling");
  train_cmd->add_option("--split", train.split, "Fraction of points used for training (rest held out)");
  train_cmd->add_option("--point-cap", train.point_cap, "Use at most this many training points");
  train_cmd->add_option("--output", train.output, "Model file")->required();

  laf::app::SweepConfig sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Speed/quality trade-off table");
  add_run_options(sweep_cmd, sweep.run);
  sweep_cmd->add_option("--alphas", sweep.alphas, "Alpha values")->delimiter(',');
  sweep_cmd->add_option("--deltas", sweep.deltas, "Delta values")->delimiter(',');

  laf::app::GridConfig grid;
  auto* grid_cmd = app.add_subcommand("grid", "Noise ratio and cluster count over an (eps, tau) grid");
  add_input(grid_cmd, grid.input, grid.format, grid.normalize);
  grid_cmd->add_option("--metric", grid.metric, "cosine | euclidean");
  grid_cmd->add_option("--eps-grid", grid.eps_grid, "eps values")->delimiter(',')->required();
  grid_cmd->add_option("--tau-grid", grid.tau_grid, "tau values")->delimiter(',')->required();
  grid_cmd->add_option("--max-noise", grid.limits.max_noise_ratio, "Qualifying cells have noise ratio below this");
  grid_cmd->add_option("--min-clusters", grid.limits.min_clusters, "Qualifying cells have more clusters than this");
  grid_cmd->add_option("--output", grid.output, "Output CSV");
  grid_cmd->add_option("--threads", grid.threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : laf::app::kConfigError;
  }

  run.threads = laf::app::thread_count(run.threads);
  sweep.run.threads = laf::app::thread_count(sweep.run.threads);
  grid.threads = laf::app::thread_count(grid.threads);

  if (*gen_cmd) return laf::app::gen(gen, std::cout, std::cerr);
  if (*run_cmd) return laf::app::run(run, std::cout, std::cerr);
  if (*train_cmd) return laf::app::train_estimator(train, std::cout, std::cerr);
  if (*sweep_cmd) return laf::app::sweep(sweep, std::cout, std::cerr);
  if (*grid_cmd) return laf::app::grid(grid, std::cout, std::cerr);
  return laf::app::kConfigError;
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "actlab/activations.hpp"
#include "actlab/data.hpp"
#include "actlab/metrics.hpp"
#include "actlab/network.hpp"
#include "actlab/optim.hpp"

namespace actlab {

struct CsvSource {
  std::string path;
  CsvOptions options;
};
struct RawSource {
  std::string path;
};
struct BlobsSource {
  int classes = 2;
  int per_class = 100;
  int dim = 2;
  double spread = 0.1;
  std::optional<uint64_t> seed;  // defaults to the experiment seed
};
struct SpiralsSource {
  int classes = 2;
  int per_class = 100;
  double noise = 0.0;
  std::optional<uint64_t> seed;
};

using DatasetSource =
    std::variant<CsvSource, RawSource, BlobsSource, SpiralsSource>;

Dataset load_dataset(const DatasetSource& src, uint64_t default_seed);

struct ExperimentConfig {
  DatasetSource dataset = BlobsSource{};
  NetworkSpec network;
  std::vector<ActivationKind> activations;
  AdamConfig optimizer;
  int batch_size = 32;
  int max_epochs = 1;
  int early_stop_patience = 15;
  int k_folds = 5;
  uint64_t seed = 0;
  std::string output_dir = "out";
  int parallel = 1;
  bool serial_timing = false;
  std::vector<double> sweep_k_values = {0.1, 1.0, 5.0, 50.0};

  void validate() const;
  nlohmann::json to_json() const;
  // Also accepts a run manifest ({"config": {...}}), so a manifest can be
  // replayed directly.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct EpochRecord {
  int fold = 0;
  int epoch = 0;
  double t = 0.0;  // training progress used for this epoch
  double train_loss = 0.0;
  double val_loss = 0.0;
  MetricRecord train_metrics;
  MetricRecord val_metrics;
  double wall_seconds = 0.0;
};

struct FoldResult {
  int fold = 0;
  std::vector<EpochRecord> epochs;
};

struct ActivationResult {
  ActivationKind activation;
  std::vector<FoldResult> folds;
};

// The training progress used at `epoch` of a fold with `max_epochs` planned:
// epoch / max(1, max_epochs - 1), clamped to [0, 1].
TrainingProgress epoch_progress(int epoch, int max_epochs);

// Trains one activation on one fold: per-epoch progress update, Adam steps
// over shuffled batches, train/val evaluation in inference mode, early
// stopping on validation loss (strict decrease, patience consecutive
// non-improving epochs). Wall time is measured around the full
// train+evaluate epoch body.
std::vector<EpochRecord> train_fold(const ExperimentConfig& cfg,
                                    const Dataset& dataset,
                                    const FoldPlan& plan, int fold,
                                    const ActivationKind& activation);

// All folds for every configured activation. Fold assignments, batch orders
// and initial parameters depend only on (seed, fold, epoch), so activations
// see a paired comparison. Jobs run `cfg.parallel` at a time
// (serial when serial_timing is set).
std::vector<ActivationResult> cross_validate(const ExperimentConfig& cfg,
                                             const Dataset& dataset,
                                             const FoldPlan& plan);
std::vector<ActivationResult> cross_validate(const ExperimentConfig& cfg);

// (best_dsrelu - best_other) / best_other * 100; best_other must be > 0.
double improvement(double best_dsrelu, double best_other);

struct BestValues {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double auc_macro = 0.0;
};

struct MetricImprovement {
  std::string metric;
  double dsrelu_best = 0.0;
  double other_best = 0.0;
  std::string other_activation;
  double improvement_pct = 0.0;
};

struct ActivationSummary {
  std::string activation;
  std::vector<BestValues> fold_best_val;  // per fold, max over epochs
  BestValues best_val;                    // max over folds
  BestValues best_train;
  double train_val_accuracy_gap = 0.0;  // best train acc - best val acc
  double mean_epoch_seconds = 0.0;
  int epochs_total = 0;
};

struct ComparisonReport {
  std::vector<ActivationSummary> activations;
  std::vector<MetricImprovement> improvements;  // DSReLU vs best other
};

ComparisonReport build_comparison(const std::vector<ActivationResult>& results);

// Writes metrics.csv, summary.csv, timing.csv, curves/<activation>_fold<i>.csv,
// manifest.json and comparison.json under out_dir. Everything except
// timing.csv and the wall_seconds curve column is byte-deterministic for a
// given config.
void emit_reports(const std::vector<ActivationResult>& results,
                  const ExperimentConfig& cfg, const Dataset& dataset,
                  const FoldPlan& plan, const std::string& out_dir);

struct KSweepEntry {
  double k = 0.0;
  ComparisonReport report;
};

// Repeats cross-validation with DSReLU schedules that differ only in k.
// Emits per-k reports under out_dir/k_<value>/, slope curves (101 grid
// points) under out_dir/slope_curves/, and ksweep_summary.csv.
std::vector<KSweepEntry> k_sweep(const ExperimentConfig& cfg,
                                 const std::vector<double>& k_values);

// Closed-form slope curve, 101 points, "t,s" rows.
void write_slope_curve(const std::string& path, const SlopeSchedule& sched);

}  // namespace actlab

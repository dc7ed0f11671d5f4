#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <stdexcept>

#include "doctest.h"

#include "actlab/harness.hpp"
#include "test_support.hpp"

using namespace actlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("actlab_harness_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

ExperimentConfig small_config(uint64_t seed) {
  ExperimentConfig cfg;
  cfg.dataset = BlobsSource{2, 20, 2, 0.2, std::nullopt};
  NetworkSpec net;
  net.input = InputShape::flat_dim(2);
  net.layers = {DenseSpec{6}, DenseSpec{2}};
  net.num_classes = 2;
  cfg.network = net;
  cfg.activations = {ActivationKind::relu(), ActivationKind::tanh_fn()};
  cfg.batch_size = 8;
  cfg.max_epochs = 2;
  cfg.early_stop_patience = 15;
  cfg.k_folds = 5;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("epoch progress follows e / (E - 1), degenerate E = 1 gives 0") {
  CHECK(epoch_progress(0, 1).value() == 0.0);
  CHECK(epoch_progress(0, 3).value() == 0.0);
  CHECK(epoch_progress(1, 3).value() == 0.5);
  CHECK(epoch_progress(2, 3).value() == 1.0);
}

TEST_CASE("train_fold records the progress sequence and nondecreasing t") {
  ExperimentConfig cfg = small_config(3);
  cfg.max_epochs = 3;
  cfg.activations = {ActivationKind::dsrelu()};
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto records = train_fold(cfg, d, plan, 0, cfg.activations[0]);
  REQUIRE(records.size() == 3);
  CHECK(records[0].t == 0.0);
  CHECK(records[1].t == 0.5);
  CHECK(records[2].t == 1.0);
  for (size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].t >= records[i - 1].t);
    CHECK(records[i].epoch == int(i));
  }
  CHECK(records[0].wall_seconds >= 0.0);
}

TEST_CASE("single-epoch run emits one record at t = 0") {
  ExperimentConfig cfg = small_config(4);
  cfg.max_epochs = 1;
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto records = train_fold(cfg, d, plan, 0, cfg.activations[0]);
  REQUIRE(records.size() == 1);
  CHECK(records[0].t == 0.0);
}

TEST_CASE("constant validation loss stops after exactly patience+1 epochs") {
  ExperimentConfig cfg = small_config(5);
  // step size far below double resolution: the network is effectively
  // frozen, so the validation loss repeats bit for bit
  cfg.optimizer.alpha = 1e-30;
  cfg.max_epochs = 50;
  cfg.early_stop_patience = 3;
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto records = train_fold(cfg, d, plan, 0, cfg.activations[0]);
  CHECK(records.size() == 4);  // patience + 1
  for (size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].val_loss == records[0].val_loss);
  }

  cfg.max_epochs = 2;  // max_epochs smaller than patience window
  const auto few = train_fold(cfg, d, plan, 0, cfg.activations[0]);
  CHECK(few.size() == 2);
}

TEST_CASE("a diverged fold aborts with the epoch and batch index") {
  ExperimentConfig cfg = small_config(17);
  // one absurd step overflows the parameters; the next forward is non-finite
  cfg.optimizer.alpha = 1e300;
  cfg.max_epochs = 3;
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  CHECK_THROWS_WITH_AS(train_fold(cfg, d, plan, 0, cfg.activations[0]),
                       doctest::Contains("aborted at epoch 0, batch 1"),
                       std::runtime_error);
}

TEST_CASE("early stopping never fires before patience is exhausted") {
  ExperimentConfig cfg = small_config(6);
  cfg.optimizer.alpha = 1e-30;
  cfg.max_epochs = 40;
  cfg.early_stop_patience = 7;
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  CHECK(train_fold(cfg, d, plan, 0, cfg.activations[0]).size() == 8);
}

TEST_CASE("cross_validate yields k fold results per activation") {
  ExperimentConfig cfg = small_config(7);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto results = cross_validate(cfg, d, plan);
  REQUIRE(results.size() == 2);
  for (const auto& ar : results) {
    CHECK(ar.folds.size() == 5);
    for (int fold = 0; fold < 5; ++fold) {
      CHECK(ar.folds[size_t(fold)].fold == fold);
      CHECK(!ar.folds[size_t(fold)].epochs.empty());
    }
  }
}

TEST_CASE("parallel execution reproduces the serial results") {
  ExperimentConfig cfg = small_config(8);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto serial = cross_validate(cfg, d, plan);
  cfg.parallel = 4;
  const auto parallel = cross_validate(cfg, d, plan);
  REQUIRE(serial.size() == parallel.size());
  for (size_t ai = 0; ai < serial.size(); ++ai) {
    for (size_t f = 0; f < serial[ai].folds.size(); ++f) {
      const auto& se = serial[ai].folds[f].epochs;
      const auto& pe = parallel[ai].folds[f].epochs;
      REQUIRE(se.size() == pe.size());
      for (size_t e = 0; e < se.size(); ++e) {
        CHECK(se[e].val_loss == pe[e].val_loss);
        CHECK(se[e].train_loss == pe[e].train_loss);
      }
    }
  }
}

TEST_CASE("improvement implements the percentage formula") {
  CHECK(improvement(0.51444, 0.418778) == doctest::Approx(22.84).epsilon(5e-4));
  CHECK(improvement(0.4613, 0.4164) == doctest::Approx(10.78).epsilon(5e-4));
  CHECK(improvement(0.37, 0.37) == 0.0);
  CHECK_THROWS_AS(improvement(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(improvement(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("emit_reports writes the full file set with expected cardinality") {
  TempDir tmp;
  // hand-built results: one activation, one fold, two epochs
  std::vector<ActivationResult> results(1);
  results[0].activation = ActivationKind::relu();
  FoldResult fr;
  fr.fold = 0;
  for (int e = 0; e < 2; ++e) {
    EpochRecord rec;
    rec.fold = 0;
    rec.epoch = e;
    rec.t = double(e);
    rec.train_loss = 0.5 - 0.1 * e;
    rec.val_loss = 0.6 - 0.1 * e;
    rec.train_metrics.accuracy = 0.8 + 0.05 * e;
    rec.train_metrics.f1_macro = 0.7;
    rec.train_metrics.auc_macro = 0.9;
    rec.val_metrics.accuracy = 0.75;
    rec.val_metrics.f1_macro = 0.65;
    rec.val_metrics.auc_macro = 0.85;
    rec.wall_seconds = 0.01;
    fr.epochs.push_back(rec);
  }
  results[0].folds.push_back(fr);

  ExperimentConfig cfg = small_config(9);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  emit_reports(results, cfg, d, plan, tmp.sub("out"));

  const std::string metrics = read_file(tmp.sub("out") + "/metrics.csv");
  CHECK(count_lines(metrics) == 1 + 4);  // header + 2 epochs x 2 splits
  CHECK(metrics.rfind("activation,fold,epoch,split,loss,accuracy,f1_macro,"
                      "auc_macro\n", 0) == 0);
  CHECK(fs::exists(tmp.sub("out") + "/summary.csv"));
  CHECK(fs::exists(tmp.sub("out") + "/timing.csv"));
  CHECK(fs::exists(tmp.sub("out") + "/manifest.json"));
  CHECK(fs::exists(tmp.sub("out") + "/comparison.json"));
  CHECK(fs::exists(tmp.sub("out") + "/curves/relu_fold0.csv"));
}

TEST_CASE("summary flags the best value in each row") {
  TempDir tmp;
  std::vector<ActivationResult> results(2);
  results[0].activation = ActivationKind::relu();
  results[1].activation = ActivationKind::tanh_fn();
  for (int ai = 0; ai < 2; ++ai) {
    FoldResult fr;
    fr.fold = 0;
    EpochRecord rec;
    rec.val_metrics.accuracy = ai == 0 ? 0.6 : 0.9;
    rec.val_metrics.f1_macro = ai == 0 ? 0.8 : 0.2;
    rec.val_metrics.auc_macro = 0.5;
    rec.train_metrics = rec.val_metrics;
    fr.epochs.push_back(rec);
    results[size_t(ai)].folds.push_back(fr);
  }
  ExperimentConfig cfg = small_config(10);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  emit_reports(results, cfg, d, plan, tmp.sub("out"));
  const std::string summary = read_file(tmp.sub("out") + "/summary.csv");
  std::istringstream lines(summary);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "metric,fold,relu,tanh,best");
  std::getline(lines, line);
  CHECK(line == "val_accuracy,0,0.6,0.9,tanh");
  std::getline(lines, line);
  CHECK(line == "val_f1_macro,0,0.8,0.2,relu");
  std::getline(lines, line);
  // equal values keep the first activation in config order
  CHECK(line == "val_auc_macro,0,0.5,0.5,relu");
}

TEST_CASE("reruns are byte-identical except timing") {
  TempDir tmp;
  ExperimentConfig cfg = small_config(11);
  cfg.activations = {ActivationKind::dsrelu(), ActivationKind::relu()};
  auto run = [&](const std::string& out) {
    Dataset d = load_dataset(cfg.dataset, cfg.seed);
    const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
    const auto results = cross_validate(cfg, d, plan);
    emit_reports(results, cfg, d, plan, out);
  };
  run(tmp.sub("a"));
  run(tmp.sub("b"));
  CHECK(read_file(tmp.sub("a") + "/metrics.csv") ==
        read_file(tmp.sub("b") + "/metrics.csv"));
  CHECK(read_file(tmp.sub("a") + "/summary.csv") ==
        read_file(tmp.sub("b") + "/summary.csv"));
  CHECK(read_file(tmp.sub("a") + "/manifest.json") ==
        read_file(tmp.sub("b") + "/manifest.json"));
  CHECK(read_file(tmp.sub("a") + "/curves/dsrelu_fold0.csv") ==
        read_file(tmp.sub("b") + "/curves/dsrelu_fold0.csv"));
}

TEST_CASE("a run manifest replays to identical metrics") {
  TempDir tmp;
  ExperimentConfig cfg = small_config(12);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  emit_reports(cross_validate(cfg, d, plan), cfg, d, plan, tmp.sub("a"));

  const ExperimentConfig replay =
      ExperimentConfig::from_file(tmp.sub("a") + "/manifest.json");
  Dataset d2 = load_dataset(replay.dataset, replay.seed);
  FoldPlan plan2 = kfold(d2, replay.k_folds, replay.seed);
  CHECK(plan2.assignments == plan.assignments);
  emit_reports(cross_validate(replay, d2, plan2), replay, d2, plan2,
               tmp.sub("b"));
  CHECK(read_file(tmp.sub("a") + "/metrics.csv") ==
        read_file(tmp.sub("b") + "/metrics.csv"));
}

TEST_CASE("config json round-trip and validation") {
  ExperimentConfig cfg = small_config(13);
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  nlohmann::json j = cfg.to_json();
  j["activations"] = {"relu", "relu"};
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(j),
                       doctest::Contains("duplicate"), std::invalid_argument);
  j = cfg.to_json();
  j["activations"] = nlohmann::json::array();
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = cfg.to_json();
  j["max_epochs"] = 0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("ksweep with the default k reproduces the plain dsrelu run") {
  TempDir tmp;
  ExperimentConfig cfg = small_config(14);
  cfg.activations = {ActivationKind::dsrelu()};
  cfg.output_dir = tmp.sub("sweep");
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  const auto direct = build_comparison(cross_validate(cfg, d, plan));
  const auto entries = k_sweep(cfg, {5.0});
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].k == 5.0);
  const auto& sweep_best = entries[0].report.activations.front().best_val;
  const auto& direct_best = direct.activations.front().best_val;
  CHECK(sweep_best.accuracy == direct_best.accuracy);
  CHECK(sweep_best.f1_macro == direct_best.f1_macro);
  CHECK(sweep_best.auc_macro == direct_best.auc_macro);
  CHECK(fs::exists(tmp.sub("sweep") + "/ksweep_summary.csv"));
  CHECK(fs::exists(tmp.sub("sweep") + "/k_5/metrics.csv"));
}

TEST_CASE("emitted slope curves match the closed form at 101 grid points") {
  TempDir tmp;
  const SlopeSchedule sched = SlopeSchedule::defaults();
  write_slope_curve(tmp.sub("curve.csv"), sched);
  std::ifstream in(tmp.sub("curve.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,s");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double t = std::stod(line.substr(0, comma));
    const double s = std::stod(line.substr(comma + 1));
    CHECK(s == slope(sched, TrainingProgress(t)));  // %.17g round-trips
    rows += 1;
  }
  CHECK(rows == 101);
}

TEST_CASE("sharper k produces a steeper emitted curve") {
  TempDir tmp;
  SlopeSchedule flat = SlopeSchedule::defaults();
  flat.steepness = 0.1;
  SlopeSchedule sharp = SlopeSchedule::defaults();
  sharp.steepness = 50.0;
  auto max_step = [&](const SlopeSchedule& s) {
    double worst = 0.0;
    double prev = slope(s, TrainingProgress(0.0));
    for (int i = 1; i <= 100; ++i) {
      const double v = slope(s, TrainingProgress(double(i) / 100.0));
      worst = std::max(worst, std::abs(v - prev) / 0.01);
      prev = v;
    }
    return worst;
  };
  // peak |ds/dt| is k (a - b) / 4: two orders of magnitude apart here
  CHECK(max_step(sharp) > 50.0 * max_step(flat));
}

TEST_CASE("emit_reports surfaces unwritable directories") {
  TempDir tmp;
  std::ofstream(tmp.sub("blocker")) << "a plain file, not a directory";
  std::vector<ActivationResult> results(1);
  results[0].activation = ActivationKind::relu();
  results[0].folds.push_back({0, {EpochRecord{}}});
  ExperimentConfig cfg = small_config(16);
  Dataset d = load_dataset(cfg.dataset, cfg.seed);
  const FoldPlan plan = kfold(d, cfg.k_folds, cfg.seed);
  CHECK_THROWS(emit_reports(results, cfg, d, plan,
                            tmp.sub("blocker") + "/nested"));
}

TEST_CASE("ksweep validates its k values") {
  ExperimentConfig cfg = small_config(15);
  CHECK_THROWS_AS(k_sweep(cfg, {}), std::invalid_argument);
  CHECK_THROWS_AS(k_sweep(cfg, {-1.0}), std::invalid_argument);
}

}  // TEST_SUITE

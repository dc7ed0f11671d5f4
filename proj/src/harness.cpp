#include "actlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "actlab/ops.hpp"

namespace actlab {

namespace fs = std::filesystem;

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

}  // namespace

Dataset load_dataset(const DatasetSource& src, uint64_t default_seed) {
  if (const auto* c = std::get_if<CsvSource>(&src)) {
    return load_csv(c->path, c->options);
  }
  if (const auto* r = std::get_if<RawSource>(&src)) {
    return load_raw_images(r->path);
  }
  if (const auto* b = std::get_if<BlobsSource>(&src)) {
    return synth_blobs(b->classes, b->per_class, b->dim, b->spread,
                       b->seed.value_or(default_seed));
  }
  const auto& s = std::get<SpiralsSource>(src);
  return synth_spirals(s.classes, s.per_class, s.noise,
                       s.seed.value_or(default_seed));
}

void ExperimentConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("config: max_epochs >= 1");
  if (early_stop_patience < 1) {
    throw std::invalid_argument("config: early_stop_patience >= 1");
  }
  if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
  if (k_folds < 2) throw std::invalid_argument("config: k_folds >= 2");
  if (parallel < 1) throw std::invalid_argument("config: parallel >= 1");
  if (activations.empty()) {
    throw std::invalid_argument("config: activation list is empty");
  }
  std::set<std::string> names;
  for (const auto& a : activations) {
    a.validate();
    if (!names.insert(a.name()).second) {
      throw std::invalid_argument("config: duplicate activation '" + a.name() +
                                  "'");
    }
  }
  optimizer.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  nlohmann::json dj;
  if (const auto* c = std::get_if<CsvSource>(&dataset)) {
    dj["kind"] = "csv";
    dj["path"] = c->path;
    dj["skip_header"] = c->options.skip_header;
    if (c->options.label_index) dj["label_column"] = *c->options.label_index;
    if (c->options.expected_classes > 0) {
      dj["expected_classes"] = c->options.expected_classes;
    }
  } else if (const auto* r = std::get_if<RawSource>(&dataset)) {
    dj["kind"] = "raw";
    dj["path"] = r->path;
  } else if (const auto* b = std::get_if<BlobsSource>(&dataset)) {
    dj["kind"] = "blobs";
    dj["classes"] = b->classes;
    dj["per_class"] = b->per_class;
    dj["dim"] = b->dim;
    dj["spread"] = b->spread;
    if (b->seed) dj["seed"] = *b->seed;
  } else {
    const auto& s = std::get<SpiralsSource>(dataset);
    dj["kind"] = "spirals";
    dj["classes"] = s.classes;
    dj["per_class"] = s.per_class;
    dj["noise"] = s.noise;
    if (s.seed) dj["seed"] = *s.seed;
  }
  j["dataset"] = dj;
  j["network"] = network.to_json();
  j["activations"] = nlohmann::json::array();
  SlopeSchedule sched = SlopeSchedule::defaults();
  double leak = 0.01;
  for (const auto& a : activations) {
    j["activations"].push_back(a.name());
    if (a.is_dsrelu()) sched = a.schedule;
    if (a.kind == ActivationKind::Kind::LeakyReLU) leak = a.leak;
  }
  j["schedule"] = {{"a", sched.initial_slope},
                   {"b", sched.final_slope},
                   {"k", sched.steepness}};
  j["leaky_alpha"] = leak;
  j["optimizer"] = {{"alpha", optimizer.alpha},
                    {"beta1", optimizer.beta1},
                    {"beta2", optimizer.beta2},
                    {"epsilon", optimizer.epsilon}};
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["early_stop_patience"] = early_stop_patience;
  j["k_folds"] = k_folds;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["parallel"] = parallel;
  j["serial_timing"] = serial_timing;
  j["k_values"] = sweep_k_values;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& full) {
  const nlohmann::json& j = full.contains("config") ? full["config"] : full;
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", uint64_t(0));

  if (j.contains("dataset")) {
    const auto& dj = j["dataset"];
    const std::string kind = dj.value("kind", "blobs");
    if (kind == "csv") {
      CsvSource c;
      c.path = dj.at("path").get<std::string>();
      c.options.skip_header = dj.value("skip_header", false);
      if (dj.contains("label_column") && !dj["label_column"].is_string()) {
        c.options.label_index = dj["label_column"].get<int>();
      }
      c.options.expected_classes = dj.value("expected_classes", 0);
      cfg.dataset = c;
    } else if (kind == "raw") {
      cfg.dataset = RawSource{dj.at("path").get<std::string>()};
    } else if (kind == "blobs") {
      BlobsSource b;
      b.classes = dj.value("classes", 2);
      b.per_class = dj.value("per_class", 100);
      b.dim = dj.value("dim", 2);
      b.spread = dj.value("spread", 0.1);
      if (dj.contains("seed")) b.seed = dj["seed"].get<uint64_t>();
      cfg.dataset = b;
    } else if (kind == "spirals") {
      SpiralsSource s;
      s.classes = dj.value("classes", 2);
      s.per_class = dj.value("per_class", 100);
      s.noise = dj.value("noise", 0.0);
      if (dj.contains("seed")) s.seed = dj["seed"].get<uint64_t>();
      cfg.dataset = s;
    } else {
      throw std::invalid_argument("config: unknown dataset kind '" + kind +
                                  "'");
    }
  }

  cfg.network = NetworkSpec::from_json(j.at("network"));

  SlopeSchedule sched = SlopeSchedule::defaults();
  if (j.contains("schedule")) {
    const auto& sj = j["schedule"];
    if (sj.contains("a_deg") || sj.contains("b_deg")) {
      sched = SlopeSchedule::from_degrees(sj.value("a_deg", 85.0),
                                          sj.value("b_deg", 10.0),
                                          sj.value("k", 5.0));
    } else {
      sched = SlopeSchedule{sj.value("a", kDefaultInitialSlope),
                            sj.value("b", kDefaultFinalSlope),
                            sj.value("k", 5.0)};
      sched.validate();
    }
  }
  const double leak = j.value("leaky_alpha", 0.01);
  std::vector<std::string> names = {"dsrelu", "mish",    "relu",
                                    "sigmoid", "tanh",    "leaky_relu"};
  if (j.contains("activations")) {
    names = j["activations"].get<std::vector<std::string>>();
  }
  for (const auto& n : names) {
    cfg.activations.push_back(ActivationKind::from_name(n, sched, leak));
  }

  if (j.contains("optimizer")) {
    const auto& oj = j["optimizer"];
    cfg.optimizer.alpha = oj.value("alpha", 1e-4);
    cfg.optimizer.beta1 = oj.value("beta1", 0.9);
    cfg.optimizer.beta2 = oj.value("beta2", 0.999);
    cfg.optimizer.epsilon = oj.value("epsilon", 1e-8);
  }
  cfg.batch_size = j.value("batch_size", 32);
  cfg.max_epochs = j.value("max_epochs", 1);
  cfg.early_stop_patience = j.value("early_stop_patience", 15);
  cfg.k_folds = j.value("k_folds", 5);
  cfg.output_dir = j.value("output_dir", "out");
  cfg.parallel = j.value("parallel", 1);
  cfg.serial_timing = j.value("serial_timing", false);
  if (j.contains("k_values")) {
    cfg.sweep_k_values = j["k_values"].get<std::vector<double>>();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

TrainingProgress epoch_progress(int epoch, int max_epochs) {
  return TrainingProgress(double(epoch) /
                          double(std::max(1, max_epochs - 1)));
}

namespace {

struct SplitEval {
  double loss = 0.0;
  MetricRecord metrics;
};

// Full inference pass over a split: gathers softmax probabilities for the
// metric suite and per-sample losses from the logits (log-sum-exp form).
SplitEval evaluate_split(Network& net, const Dataset& split, int batch_size) {
  const int64_t n = split.size();
  const int c = split.class_count;
  Tensor probs({int(n), c});
  double loss_total = 0.0;
  for (int64_t start = 0; start < n; start += batch_size) {
    const int64_t end = std::min(n, start + batch_size);
    std::vector<int> idx(size_t(end - start));
    for (int64_t i = start; i < end; ++i) idx[size_t(i - start)] = int(i);
    auto [x, y] = split.batch(idx);
    Graph g(Graph::Mode::Inference);
    Tensor logits = net.forward(g, x);
    if (logits.shape()[1] != c) {
      throw std::runtime_error("network produces " +
                               std::to_string(logits.shape()[1]) +
                               " logits but the dataset declares " +
                               std::to_string(c) + " classes");
    }
    Tensor p = ops::softmax_rows(logits);
    for (int64_t i = 0; i < end - start; ++i) {
      const int64_t base = i * c;
      double mx = logits[base];
      for (int j = 1; j < c; ++j) mx = std::max(mx, logits[base + j]);
      double z = 0.0;
      for (int j = 0; j < c; ++j) z += std::exp(logits[base + j] - mx);
      loss_total += (mx + std::log(z)) - logits[base + y[size_t(i)]];
      std::copy_n(p.data().begin() + size_t(base), size_t(c),
                  probs.data().begin() + size_t((start + i) * c));
    }
  }
  SplitEval ev;
  ev.loss = loss_total / double(n);
  ev.metrics = evaluate(EvalBatch::make(std::move(probs), split.labels));
  return ev;
}

}  // namespace

std::vector<EpochRecord> train_fold(const ExperimentConfig& cfg,
                                    const Dataset& dataset,
                                    const FoldPlan& plan, int fold,
                                    const ActivationKind& activation) {
  const auto train_idx = plan.train_indices(fold);
  const auto val_idx = plan.val_indices(fold);
  Dataset train = dataset.subset(train_idx);
  Dataset val = dataset.subset(val_idx);
  Dataset* others[] = {&val};
  standardize(train, others);

  // Everything seeded here depends only on (seed, fold, epoch), never on the
  // activation, so competing activations are compared on identical runs.
  const uint64_t fold_seed = cfg.seed ^ uint64_t(fold);
  NetworkSpec spec = cfg.network;
  spec.activation = activation;
  spec.seed = fold_seed;
  Network net = Network::build(spec);
  AdamState state = AdamState::init(net.parameters());

  std::vector<EpochRecord> records;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const TrainingProgress t = epoch_progress(epoch, cfg.max_epochs);
    net.set_progress(t);
    const auto tic = std::chrono::steady_clock::now();

    const auto batch_plan =
        batches(train.size(), cfg.batch_size, fold_seed, epoch);
    for (size_t bi = 0; bi < batch_plan.size(); ++bi) {
      try {
        auto [x, y] = train.batch(batch_plan[bi]);
        Graph g(Graph::Mode::Training);
        Tensor logits = net.forward(g, x);
        Tensor loss = cross_entropy(g, logits, y);
        g.backward(loss);
        adam_step(net.parameters(), state, cfg.optimizer);
        net.zero_grads();
      } catch (const std::exception& e) {
        throw std::runtime_error("fold " + std::to_string(fold) +
                                 " aborted at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(bi) + ": " +
                                 e.what());
      }
    }

    const SplitEval train_ev = evaluate_split(net, train, cfg.batch_size);
    const SplitEval val_ev = evaluate_split(net, val, cfg.batch_size);
    const auto toc = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.fold = fold;
    rec.epoch = epoch;
    rec.t = t.value();
    rec.train_loss = train_ev.loss;
    rec.val_loss = val_ev.loss;
    rec.train_metrics = train_ev.metrics;
    rec.val_metrics = val_ev.metrics;
    rec.wall_seconds = std::chrono::duration<double>(toc - tic).count();
    records.push_back(std::move(rec));

    if (val_ev.loss < best_val_loss) {
      best_val_loss = val_ev.loss;
      epochs_without_improvement = 0;
    } else {
      epochs_without_improvement += 1;
      if (epochs_without_improvement >= cfg.early_stop_patience) break;
    }
  }
  return records;
}

std::vector<ActivationResult> cross_validate(const ExperimentConfig& cfg,
                                             const Dataset& dataset,
                                             const FoldPlan& plan) {
  cfg.validate();
  std::vector<ActivationResult> results(cfg.activations.size());
  for (size_t ai = 0; ai < cfg.activations.size(); ++ai) {
    results[ai].activation = cfg.activations[ai];
    results[ai].folds.resize(size_t(cfg.k_folds));
  }
  struct Job {
    size_t ai;
    int fold;
  };
  std::vector<Job> jobs;
  for (size_t ai = 0; ai < cfg.activations.size(); ++ai) {
    for (int fold = 0; fold < cfg.k_folds; ++fold) jobs.push_back({ai, fold});
  }
  const int workers =
      cfg.serial_timing ? 1 : std::min<int>(cfg.parallel, int(jobs.size()));
  if (workers <= 1) {
    for (const Job& job : jobs) {
      results[job.ai].folds[size_t(job.fold)] = FoldResult{
          job.fold,
          train_fold(cfg, dataset, plan, job.fold, cfg.activations[job.ai])};
    }
    return results;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (size_t j = next.fetch_add(1); j < jobs.size();
           j = next.fetch_add(1)) {
        try {
          const Job& job = jobs[j];
          results[job.ai].folds[size_t(job.fold)] = FoldResult{
              job.fold, train_fold(cfg, dataset, plan, job.fold,
                                   cfg.activations[job.ai])};
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

std::vector<ActivationResult> cross_validate(const ExperimentConfig& cfg) {
  Dataset dataset = load_dataset(cfg.dataset, cfg.seed);
  FoldPlan plan = kfold(dataset, cfg.k_folds, cfg.seed);
  return cross_validate(cfg, dataset, plan);
}

double improvement(double best_dsrelu, double best_other) {
  if (!(best_other > 0.0)) {
    throw std::invalid_argument(
        "improvement: denominator must be strictly positive");
  }
  return (best_dsrelu - best_other) / best_other * 100.0;
}

namespace {

BestValues epoch_best(const BestValues& cur, double acc, double f1,
                      double auc) {
  BestValues b = cur;
  b.accuracy = std::max(b.accuracy, acc);
  b.f1_macro = std::max(b.f1_macro, f1);
  b.auc_macro = std::max(b.auc_macro, auc);
  return b;
}

double pick(const BestValues& b, const std::string& metric) {
  if (metric == "accuracy") return b.accuracy;
  if (metric == "f1_macro") return b.f1_macro;
  return b.auc_macro;
}

}  // namespace

ComparisonReport build_comparison(const std::vector<ActivationResult>& results) {
  ComparisonReport report;
  for (const ActivationResult& ar : results) {
    ActivationSummary s;
    s.activation = ar.activation.name();
    double wall_total = 0.0;
    int epochs = 0;
    for (const FoldResult& fr : ar.folds) {
      BestValues fold_best;
      for (const EpochRecord& er : fr.epochs) {
        fold_best = epoch_best(fold_best, er.val_metrics.accuracy,
                               er.val_metrics.f1_macro,
                               er.val_metrics.auc_macro);
        s.best_train = epoch_best(s.best_train, er.train_metrics.accuracy,
                                  er.train_metrics.f1_macro,
                                  er.train_metrics.auc_macro);
        wall_total += er.wall_seconds;
        epochs += 1;
      }
      s.fold_best_val.push_back(fold_best);
      s.best_val = epoch_best(s.best_val, fold_best.accuracy,
                              fold_best.f1_macro, fold_best.auc_macro);
    }
    s.train_val_accuracy_gap = s.best_train.accuracy - s.best_val.accuracy;
    s.epochs_total = epochs;
    s.mean_epoch_seconds = epochs > 0 ? wall_total / double(epochs) : 0.0;
    report.activations.push_back(std::move(s));
  }

  const auto dsrelu_it =
      std::find_if(report.activations.begin(), report.activations.end(),
                   [](const ActivationSummary& s) {
                     return s.activation == "dsrelu";
                   });
  if (dsrelu_it != report.activations.end() && report.activations.size() > 1) {
    for (const std::string metric : {"accuracy", "f1_macro", "auc_macro"}) {
      const ActivationSummary* best_other = nullptr;
      for (const ActivationSummary& s : report.activations) {
        if (s.activation == "dsrelu") continue;
        if (!best_other || pick(s.best_val, metric) >
                               pick(best_other->best_val, metric)) {
          best_other = &s;
        }
      }
      if (best_other && pick(best_other->best_val, metric) > 0.0) {
        MetricImprovement mi;
        mi.metric = metric;
        mi.dsrelu_best = pick(dsrelu_it->best_val, metric);
        mi.other_best = pick(best_other->best_val, metric);
        mi.other_activation = best_other->activation;
        mi.improvement_pct = improvement(mi.dsrelu_best, mi.other_best);
        report.improvements.push_back(std::move(mi));
      }
    }
  }
  return report;
}

void emit_reports(const std::vector<ActivationResult>& results,
                  const ExperimentConfig& cfg, const Dataset& dataset,
                  const FoldPlan& plan, const std::string& out_dir) {
  if (results.empty()) {
    throw std::invalid_argument("emit_reports: no results");
  }
  const size_t fold_count = results.front().folds.size();
  for (const auto& ar : results) {
    if (ar.folds.size() != fold_count) {
      throw std::invalid_argument(
          "emit_reports: activations ran different fold counts");
    }
  }
  fs::create_directories(fs::path(out_dir) / "curves");

  {  // metrics.csv: one row per activation × fold × epoch × split
    auto out = open_out(fs::path(out_dir) / "metrics.csv");
    out << "activation,fold,epoch,split,loss,accuracy,f1_macro,auc_macro\n";
    for (const ActivationResult& ar : results) {
      const std::string name = ar.activation.name();
      for (const FoldResult& fr : ar.folds) {
        for (const EpochRecord& er : fr.epochs) {
          out << name << ',' << er.fold << ',' << er.epoch << ",train,"
              << fmt_g(er.train_loss) << ',' << fmt_g(er.train_metrics.accuracy)
              << ',' << fmt_g(er.train_metrics.f1_macro) << ','
              << fmt_g(er.train_metrics.auc_macro) << '\n';
          out << name << ',' << er.fold << ',' << er.epoch << ",val,"
              << fmt_g(er.val_loss) << ',' << fmt_g(er.val_metrics.accuracy)
              << ',' << fmt_g(er.val_metrics.f1_macro) << ','
              << fmt_g(er.val_metrics.auc_macro) << '\n';
        }
      }
    }
  }

  const ComparisonReport comparison = build_comparison(results);

  {  // summary.csv: best validation metrics per activation × fold
    auto out = open_out(fs::path(out_dir) / "summary.csv");
    out << "metric,fold";
    for (const auto& s : comparison.activations) out << ',' << s.activation;
    out << ",best\n";
    for (const std::string metric : {"accuracy", "f1_macro", "auc_macro"}) {
      for (int fold = 0; fold < int(fold_count); ++fold) {
        out << "val_" << metric << ',' << fold;
        const ActivationSummary* best = nullptr;
        for (const auto& s : comparison.activations) {
          const double v = pick(s.fold_best_val[size_t(fold)], metric);
          out << ',' << fmt_g(v);
          if (!best ||
              v > pick(best->fold_best_val[size_t(fold)], metric)) {
            best = &s;
          }
        }
        out << ',' << best->activation << '\n';
      }
    }
  }

  {  // timing.csv (not expected to be deterministic)
    auto out = open_out(fs::path(out_dir) / "timing.csv");
    out << "activation,mean_epoch_seconds,epochs_timed\n";
    for (const auto& s : comparison.activations) {
      out << s.activation << ',' << fmt_g(s.mean_epoch_seconds) << ','
          << s.epochs_total << '\n';
    }
  }

  for (const ActivationResult& ar : results) {  // per-run curves
    for (const FoldResult& fr : ar.folds) {
      auto out = open_out(fs::path(out_dir) / "curves" /
                          (ar.activation.name() + "_fold" +
                           std::to_string(fr.fold) + ".csv"));
      // Wall time stays out of the curves so reruns are byte-identical;
      // per-activation timing lives in timing.csv.
      out << "epoch,t,train_loss,val_loss,train_accuracy,val_accuracy,"
             "train_f1_macro,val_f1_macro,train_auc_macro,val_auc_macro\n";
      for (const EpochRecord& er : fr.epochs) {
        out << er.epoch << ',' << fmt_g(er.t) << ',' << fmt_g(er.train_loss)
            << ',' << fmt_g(er.val_loss) << ','
            << fmt_g(er.train_metrics.accuracy) << ','
            << fmt_g(er.val_metrics.accuracy) << ','
            << fmt_g(er.train_metrics.f1_macro) << ','
            << fmt_g(er.val_metrics.f1_macro) << ','
            << fmt_g(er.train_metrics.auc_macro) << ','
            << fmt_g(er.val_metrics.auc_macro) << '\n';
      }
    }
  }

  {  // manifest.json: full config + the protocol choices in effect
    nlohmann::json m;
    m["config"] = cfg.to_json();
    m["protocol"] = {
        {"f1_averaging", "macro"},
        {"auc", "one_vs_rest_macro_rank_ties_half"},
        {"argmax_tie_break", "lowest_class_index"},
        {"initialization", "kaiming_uniform_fan_in_gain_sqrt2_bias_zero"},
        {"progress_formula", "epoch / max(1, max_epochs - 1)"},
        {"dsrelu_gradient_at_zero", 1.0},
        {"slope_evaluation", "once_per_epoch"},
        {"early_stopping",
         {{"monitor", "val_loss"},
          {"mode", "strict_decrease"},
          {"min_delta", 0.0},
          {"restore_best_weights", false}}},
        {"standardization", "per_feature_train_statistics"},
        {"loss_reduction", "batch_mean"},
        {"adam_epsilon_placement", "outside_sqrt"},
        {"fold_seed", "seed_xor_fold"},
        {"batch_seed", "fold_seed_xor_epoch"},
    };
    nlohmann::json dj;
    dj["name"] = dataset.name;
    dj["samples"] = dataset.size();
    dj["features"] = dataset.feature_dim();
    dj["classes"] = dataset.class_count;
    dj["class_histogram"] = dataset.class_histogram();
    m["dataset"] = dj;
    nlohmann::json fj;
    fj["k"] = plan.k;
    std::vector<int> sizes(size_t(plan.k), 0);
    for (int a : plan.assignments) sizes[size_t(a)] += 1;
    fj["fold_sizes"] = sizes;
    m["folds"] = fj;
    auto out = open_out(fs::path(out_dir) / "manifest.json");
    out << m.dump(2) << '\n';
  }

  {  // comparison.json: best values, improvements, train-val gaps
    nlohmann::json c;
    c["activations"] = nlohmann::json::array();
    for (const auto& s : comparison.activations) {
      nlohmann::json sj;
      sj["activation"] = s.activation;
      sj["best_val"] = {{"accuracy", s.best_val.accuracy},
                        {"f1_macro", s.best_val.f1_macro},
                        {"auc_macro", s.best_val.auc_macro}};
      sj["best_train"] = {{"accuracy", s.best_train.accuracy},
                          {"f1_macro", s.best_train.f1_macro},
                          {"auc_macro", s.best_train.auc_macro}};
      sj["train_val_accuracy_gap"] = s.train_val_accuracy_gap;
      sj["mean_epoch_seconds"] = s.mean_epoch_seconds;
      sj["epochs_total"] = s.epochs_total;
      c["activations"].push_back(sj);
    }
    c["improvements"] = nlohmann::json::array();
    for (const auto& mi : comparison.improvements) {
      c["improvements"].push_back({{"metric", mi.metric},
                                   {"dsrelu_best", mi.dsrelu_best},
                                   {"other_best", mi.other_best},
                                   {"other_activation", mi.other_activation},
                                   {"improvement_pct", mi.improvement_pct}});
    }
    auto out = open_out(fs::path(out_dir) / "comparison.json");
    out << c.dump(2) << '\n';
  }
}

void write_slope_curve(const std::string& path, const SlopeSchedule& sched) {
  auto out = open_out(path);
  out << "t,s\n";
  char buf[64];
  for (int i = 0; i <= 100; ++i) {
    const double t = double(i) / 100.0;
    // full precision so the curve round-trips to the closed form exactly
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g",
                  t, slope(sched, TrainingProgress(t)));
    out << buf << '\n';
  }
}

std::vector<KSweepEntry> k_sweep(const ExperimentConfig& cfg,
                                 const std::vector<double>& k_values) {
  if (k_values.empty()) {
    throw std::invalid_argument("k_sweep: no k values");
  }
  for (double k : k_values) {
    if (!(k > 0.0)) throw std::invalid_argument("k_sweep: k values must be > 0");
  }
  SlopeSchedule base = SlopeSchedule::defaults();
  for (const auto& a : cfg.activations) {
    if (a.is_dsrelu()) base = a.schedule;
  }
  Dataset dataset = load_dataset(cfg.dataset, cfg.seed);
  FoldPlan plan = kfold(dataset, cfg.k_folds, cfg.seed);

  fs::create_directories(fs::path(cfg.output_dir) / "slope_curves");
  std::vector<KSweepEntry> entries;
  for (double k : k_values) {
    SlopeSchedule sched = base;
    sched.steepness = k;
    ExperimentConfig run = cfg;
    run.activations = {ActivationKind::dsrelu(sched)};
    run.output_dir =
        (fs::path(cfg.output_dir) / ("k_" + fmt_g(k))).string();
    const auto results = cross_validate(run, dataset, plan);
    emit_reports(results, run, dataset, plan, run.output_dir);
    write_slope_curve(
        (fs::path(cfg.output_dir) / "slope_curves" / ("k_" + fmt_g(k) + ".csv"))
            .string(),
        sched);
    entries.push_back({k, build_comparison(results)});
  }

  auto out = open_out(fs::path(cfg.output_dir) / "ksweep_summary.csv");
  out << "k,best_val_accuracy,best_val_f1_macro,best_val_auc_macro,"
         "mean_epoch_seconds\n";
  for (const auto& e : entries) {
    const auto& s = e.report.activations.front();
    out << fmt_g(e.k) << ',' << fmt_g(s.best_val.accuracy) << ','
        << fmt_g(s.best_val.f1_macro) << ',' << fmt_g(s.best_val.auc_macro)
        << ',' << fmt_g(s.mean_epoch_seconds) << '\n';
  }
  return entries;
}

}  // namespace actlab

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "actlab/data.hpp"
#include "actlab/gradcheck.hpp"
#include "actlab/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  uint64_t seed = 0;
  int parallel = 0;
  bool serial_timing = false;
  bool skip_header = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config_path,
                            "experiment config JSON (or a run manifest)");
  if (config_required) c->required();
  cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", o.seed, "experiment seed (overrides config)")
      ->each([&o](const std::string&) { o.has_seed = true; });
  cmd->add_option("--parallel", o.parallel,
                  "max concurrent fold×activation jobs");
  cmd->add_flag("--serial-timing", o.serial_timing,
                "force sequential jobs so epoch timings are comparable");
  cmd->add_flag("--skip-header", o.skip_header,
                "CSV dataset input has a header row");
}

actlab::ExperimentConfig load_config(const CommonOpts& o) {
  actlab::ExperimentConfig cfg =
      actlab::ExperimentConfig::from_file(o.config_path);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (o.has_seed) cfg.seed = o.seed;
  if (o.parallel > 0) cfg.parallel = o.parallel;
  if (o.serial_timing) cfg.serial_timing = true;
  if (o.skip_header) {
    if (auto* c = std::get_if<actlab::CsvSource>(&cfg.dataset)) {
      c->options.skip_header = true;
    }
  }
  cfg.validate();
  return cfg;
}

void print_comparison(const actlab::ComparisonReport& report) {
  for (const auto& s : report.activations) {
    std::cout << s.activation << ": best val acc " << s.best_val.accuracy
              << ", f1 " << s.best_val.f1_macro << ", auc "
              << s.best_val.auc_macro << ", mean epoch "
              << s.mean_epoch_seconds << "s over " << s.epochs_total
              << " epochs\n";
  }
  for (const auto& mi : report.improvements) {
    std::cout << "dsrelu vs " << mi.other_activation << " on " << mi.metric
              << ": " << mi.improvement_pct << "%\n";
  }
}

int run_train(const CommonOpts& o) {
  actlab::ExperimentConfig cfg = load_config(o);
  actlab::Dataset dataset = actlab::load_dataset(cfg.dataset, cfg.seed);
  actlab::FoldPlan plan = actlab::kfold(dataset, cfg.k_folds, cfg.seed);
  const actlab::ActivationKind act = cfg.activations.front();
  std::cout << "training " << act.name() << " on fold 0 of " << cfg.k_folds
            << " (" << dataset.name << ", " << dataset.size() << " samples)\n";
  std::vector<actlab::ActivationResult> results(1);
  results[0].activation = act;
  results[0].folds.push_back(
      {0, actlab::train_fold(cfg, dataset, plan, 0, act)});
  actlab::emit_reports(results, cfg, dataset, plan, cfg.output_dir);
  print_comparison(actlab::build_comparison(results));
  std::cout << "reports written to " << cfg.output_dir << "\n";
  return 0;
}

int run_cv(const CommonOpts& o) {
  actlab::ExperimentConfig cfg = load_config(o);
  actlab::Dataset dataset = actlab::load_dataset(cfg.dataset, cfg.seed);
  actlab::FoldPlan plan = actlab::kfold(dataset, cfg.k_folds, cfg.seed);
  std::cout << "cross-validating " << cfg.activations.size()
            << " activations, " << cfg.k_folds << " folds, on " << dataset.name
            << " (" << dataset.size() << " samples)\n";
  const auto results = actlab::cross_validate(cfg, dataset, plan);
  actlab::emit_reports(results, cfg, dataset, plan, cfg.output_dir);
  print_comparison(actlab::build_comparison(results));
  std::cout << "reports written to " << cfg.output_dir << "\n";
  return 0;
}

int run_ksweep(const CommonOpts& o) {
  actlab::ExperimentConfig cfg = load_config(o);
  const auto entries = actlab::k_sweep(cfg, cfg.sweep_k_values);
  for (const auto& e : entries) {
    const auto& s = e.report.activations.front();
    std::cout << "k=" << e.k << ": best val acc " << s.best_val.accuracy
              << ", f1 " << s.best_val.f1_macro << ", auc "
              << s.best_val.auc_macro << "\n";
  }
  std::cout << "reports written to " << cfg.output_dir << "\n";
  return 0;
}

int run_gradcheck(uint64_t seed) {
  int failures = 0;
  auto report = [&](const std::vector<actlab::GradCheckReport>& rs) {
    for (const auto& r : rs) {
      std::cout << (r.pass ? "[ok]   " : "[FAIL] ") << r.name
                << "  max_rel_err=" << r.max_rel_err << "  tol=" << r.tolerance
                << "  coords=" << r.coords_checked << "\n";
      if (!r.pass) ++failures;
    }
  };
  report(actlab::activation_gradient_checks(seed));
  report(actlab::layer_gradient_checks(seed));
  report(actlab::network_gradient_checks(seed));
  if (failures > 0) {
    std::cerr << "error: " << failures << " gradient check(s) failed\n";
    return 1;
  }
  std::cout << "all gradient checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "activation-comparison training laboratory "
      "(dynamic-slope and baseline activations)"};
  app.require_subcommand(1);

  CommonOpts train_opts, cv_opts, ksweep_opts;
  auto* train_cmd =
      app.add_subcommand("train", "train one activation on one fold");
  add_common(train_cmd, train_opts, true);
  auto* cv_cmd = app.add_subcommand(
      "cv", "cross-validated comparison of the configured activations");
  add_common(cv_cmd, cv_opts, true);
  auto* ksweep_cmd = app.add_subcommand(
      "ksweep", "repeat cv with the dynamic slope's k varied");
  add_common(ksweep_cmd, ksweep_opts, true);

  uint64_t gradcheck_seed = 12345;
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "run the finite-difference gradient suites");
  gradcheck_cmd->add_option("--seed", gradcheck_seed, "rng seed");

  std::string gen_kind = "blobs", gen_out;
  int gen_classes = 2, gen_per_class = 100, gen_dim = 2;
  double gen_spread = 0.1, gen_noise = 0.0;
  uint64_t gen_seed = 0;
  auto* gen_cmd =
      app.add_subcommand("gen-data", "write a synthetic dataset to a file");
  gen_cmd->add_option("--kind", gen_kind, "blobs | spirals | raw-demo")
      ->check(CLI::IsMember({"blobs", "spirals", "raw-demo"}));
  gen_cmd->add_option("--out", gen_out, "output path")->required();
  gen_cmd->add_option("--classes", gen_classes, "class count");
  gen_cmd->add_option("--per-class", gen_per_class, "samples per class");
  gen_cmd->add_option("--dim", gen_dim, "feature dimension (blobs)");
  gen_cmd->add_option("--spread", gen_spread, "gaussian spread (blobs)");
  gen_cmd->add_option("--noise", gen_noise, "noise sd (spirals)");
  gen_cmd->add_option("--seed", gen_seed, "rng seed");

  try {
    app.parse(argc, argv);
    if (*train_cmd) return run_train(train_opts);
    if (*cv_cmd) return run_cv(cv_opts);
    if (*ksweep_cmd) return run_ksweep(ksweep_opts);
    if (*gradcheck_cmd) return run_gradcheck(gradcheck_seed);
    if (*gen_cmd) {
      if (gen_kind == "blobs") {
        actlab::write_csv(gen_out,
                          actlab::synth_blobs(gen_classes, gen_per_class,
                                              gen_dim, gen_spread, gen_seed));
      } else if (gen_kind == "spirals") {
        actlab::write_csv(gen_out,
                          actlab::synth_spirals(gen_classes, gen_per_class,
                                                gen_noise, gen_seed));
      } else {
        // small random image container exercising the raw codec end to end;
        // 9x9 spatial extents compose with stride-2 residual blocks
        actlab::Dataset d = actlab::synth_blobs(gen_classes, gen_per_class,
                                                3 * 9 * 9, 0.25, gen_seed);
        for (auto& v : d.features.data()) {
          v = std::min(1.0, std::max(0.0, 0.5 + 0.5 * v));
        }
        d.image_shape = {3, 9, 9};
        actlab::write_raw_images(gen_out, d);
      }
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actlab/tensor.hpp"

namespace actlab {

// Softmax outputs plus ground truth. Rows must sum to 1 (±1e-9) and labels
// must lie in [0, C).
struct EvalBatch {
  Tensor probabilities;  // [N×C]
  std::vector<int> labels;

  static EvalBatch make(Tensor probabilities, std::vector<int> labels);
  int samples() const { return probabilities.shape()[0]; }
  int classes() const { return probabilities.shape()[1]; }
};

struct PerClassMetrics {
  int cls = 0;
  int support = 0;  // count in labels
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent when the class is AUC-ineligible
};

struct MetricRecord {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double auc_macro = 0.0;
  std::vector<PerClassMetrics> per_class;
  std::vector<int> auc_skipped_classes;

  // "fold,epoch,split,accuracy,f1_macro,auc_macro"
  std::string csv_row(int fold, int epoch, const std::string& split) const;
};

// Argmax per row, ties broken toward the lowest class index.
std::vector<int> argmax_rows(const Tensor& probabilities);

// Fraction of rows whose argmax equals the label.
double accuracy(const EvalBatch& e);

// Per-class F1 with zero-division -> 0, averaged (unweighted) over the
// classes present in labels or predictions.
double f1_macro(const EvalBatch& e);

struct AucResult {
  double macro = 0.0;
  std::vector<int> skipped_classes;  // no positive or no negative sample
};

// One-vs-rest rank (Mann–Whitney) AUC per eligible class, ties counted 0.5,
// averaged over eligible classes. Throws if no class is eligible.
AucResult auc_macro(const EvalBatch& e);

// counts[true][predicted]
std::vector<std::vector<int>> confusion_matrix(const EvalBatch& e);

// All of the above in one record.
MetricRecord evaluate(const EvalBatch& e);

}  // namespace actlab

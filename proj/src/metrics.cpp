#include "actlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

namespace actlab {

EvalBatch EvalBatch::make(Tensor probabilities, std::vector<int> labels) {
  if (probabilities.rank() != 2) {
    throw std::invalid_argument("eval batch: probabilities must be [N×C]");
  }
  const int n = probabilities.shape()[0], c = probabilities.shape()[1];
  if (int(labels.size()) != n) {
    throw std::invalid_argument("eval batch: label count " +
                                std::to_string(labels.size()) +
                                " does not match row count " +
                                std::to_string(n));
  }
  if (n == 0) throw std::invalid_argument("eval batch: empty batch");
  require_finite(probabilities, "eval batch probabilities");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < c; ++j) row += probabilities[int64_t(i) * c + j];
    if (std::abs(row - 1.0) > 1e-9) {
      throw std::invalid_argument("eval batch: row " + std::to_string(i) +
                                  " sums to " + std::to_string(row) +
                                  ", expected 1");
    }
    if (labels[size_t(i)] < 0 || labels[size_t(i)] >= c) {
      throw std::invalid_argument("eval batch: label " +
                                  std::to_string(labels[size_t(i)]) +
                                  " out of range [0," + std::to_string(c) +
                                  ")");
    }
  }
  return EvalBatch{std::move(probabilities), std::move(labels)};
}

std::vector<int> argmax_rows(const Tensor& probabilities) {
  const int n = probabilities.shape()[0], c = probabilities.shape()[1];
  std::vector<int> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_v = probabilities[int64_t(i) * c];
    for (int j = 1; j < c; ++j) {
      const double v = probabilities[int64_t(i) * c + j];
      if (v > best_v) {  // strict: ties keep the lowest index
        best_v = v;
        best = j;
      }
    }
    out[size_t(i)] = best;
  }
  return out;
}

double accuracy(const EvalBatch& e) {
  const auto preds = argmax_rows(e.probabilities);
  int correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == e.labels[i]) ++correct;
  }
  return double(correct) / double(preds.size());
}

std::vector<std::vector<int>> confusion_matrix(const EvalBatch& e) {
  const int c = e.classes();
  std::vector<std::vector<int>> m(size_t(c), std::vector<int>(size_t(c), 0));
  const auto preds = argmax_rows(e.probabilities);
  for (size_t i = 0; i < preds.size(); ++i) {
    m[size_t(e.labels[i])][size_t(preds[i])] += 1;
  }
  return m;
}

namespace {

struct ClassCounts {
  int tp = 0, fp = 0, fn = 0;
};

PerClassMetrics prf(int cls, int support, const ClassCounts& cc) {
  PerClassMetrics p;
  p.cls = cls;
  p.support = support;
  p.precision = (cc.tp + cc.fp) > 0 ? double(cc.tp) / double(cc.tp + cc.fp) : 0.0;
  p.recall = (cc.tp + cc.fn) > 0 ? double(cc.tp) / double(cc.tp + cc.fn) : 0.0;
  p.f1 = (p.precision + p.recall) > 0.0
             ? 2.0 * p.precision * p.recall / (p.precision + p.recall)
             : 0.0;
  return p;
}

// Rank AUC for one class column; returns nothing when ineligible.
std::optional<double> class_auc(const Tensor& probs,
                                const std::vector<int>& labels, int cls) {
  const int n = probs.shape()[0], c = probs.shape()[1];
  int pos = 0;
  for (int l : labels) {
    if (l == cls) ++pos;
  }
  const int neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[int64_t(a) * c + cls] < probs[int64_t(b) * c + cls];
  });
  // Average ranks over tie groups (1-based), accumulate positive ranks.
  double pos_rank_sum = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    const double v = probs[int64_t(order[size_t(i)]) * c + cls];
    while (j < n && probs[int64_t(order[size_t(j)]) * c + cls] == v) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);  // mean of ranks i+1..j
    for (int t = i; t < j; ++t) {
      if (labels[size_t(order[size_t(t)])] == cls) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  return (pos_rank_sum - 0.5 * double(pos) * double(pos + 1)) /
         (double(pos) * double(neg));
}

}  // namespace

double f1_macro(const EvalBatch& e) {
  const auto preds = argmax_rows(e.probabilities);
  std::set<int> present(e.labels.begin(), e.labels.end());
  present.insert(preds.begin(), preds.end());
  std::vector<ClassCounts> counts(size_t(e.classes()));
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == e.labels[i]) {
      counts[size_t(preds[i])].tp += 1;
    } else {
      counts[size_t(preds[i])].fp += 1;
      counts[size_t(e.labels[i])].fn += 1;
    }
  }
  double total = 0.0;
  for (int cls : present) {
    total += prf(cls, 0, counts[size_t(cls)]).f1;
  }
  return total / double(present.size());
}

AucResult auc_macro(const EvalBatch& e) {
  AucResult r;
  double total = 0.0;
  int eligible = 0;
  for (int cls = 0; cls < e.classes(); ++cls) {
    const auto auc = class_auc(e.probabilities, e.labels, cls);
    if (auc.has_value()) {
      total += *auc;
      ++eligible;
    } else {
      r.skipped_classes.push_back(cls);
    }
  }
  if (eligible == 0) {
    throw std::invalid_argument(
        "auc_macro: no class has both a positive and a negative sample");
  }
  r.macro = total / double(eligible);
  return r;
}

MetricRecord evaluate(const EvalBatch& e) {
  MetricRecord rec;
  rec.accuracy = accuracy(e);

  const auto preds = argmax_rows(e.probabilities);
  std::set<int> present(e.labels.begin(), e.labels.end());
  present.insert(preds.begin(), preds.end());
  std::vector<ClassCounts> counts(size_t(e.classes()));
  std::vector<int> support(size_t(e.classes()), 0);
  for (size_t i = 0; i < preds.size(); ++i) {
    support[size_t(e.labels[i])] += 1;
    if (preds[i] == e.labels[i]) {
      counts[size_t(preds[i])].tp += 1;
    } else {
      counts[size_t(preds[i])].fp += 1;
      counts[size_t(e.labels[i])].fn += 1;
    }
  }
  double f1_total = 0.0;
  for (int cls : present) {
    PerClassMetrics p = prf(cls, support[size_t(cls)], counts[size_t(cls)]);
    p.auc = class_auc(e.probabilities, e.labels, cls);
    f1_total += p.f1;
    rec.per_class.push_back(p);
  }
  rec.f1_macro = f1_total / double(present.size());

  const AucResult auc = auc_macro(e);
  rec.auc_macro = auc.macro;
  rec.auc_skipped_classes = auc.skipped_classes;
  return rec;
}

std::string MetricRecord::csv_row(int fold, int epoch,
                                  const std::string& split) const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%d,%s,%.9g,%.9g,%.9g", fold, epoch,
                split.c_str(), accuracy, f1_macro, auc_macro);
  return buf;
}

}  // namespace actlab

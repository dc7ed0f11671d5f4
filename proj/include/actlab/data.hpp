#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actlab/tensor.hpp"

namespace actlab {

// Immutable-after-load labeled feature matrix. Features are stored flat as
// [N×D]; when `image_shape` is set, a row is the row-major flattening of a
// C×H×W image (C*H*W == D).
struct Dataset {
  Tensor features;  // [N×D]
  std::optional<std::array<int, 3>> image_shape;
  std::vector<int> labels;
  int class_count = 0;
  std::string name;

  int64_t size() const { return features.shape()[0]; }
  int64_t feature_dim() const { return features.shape()[1]; }
  std::vector<int> class_histogram() const;

  Dataset subset(std::span<const int> indices) const;
  // Gathers the rows of `indices` into a batch (features, labels).
  std::pair<Tensor, std::vector<int>> batch(std::span<const int> indices) const;

  void validate() const;
};

struct CsvOptions {
  bool skip_header = false;
  // Label column; unset means the last column.
  std::optional<int> label_index;
  // When > 0, labels must lie in [0, expected_classes); otherwise the class
  // count is max(label)+1.
  int expected_classes = 0;
};

// Comma-separated numeric rows, one sample per row, labels as nonnegative
// integers in the label column.
Dataset load_csv(const std::string& path, const CsvOptions& opts = {});
void write_csv(const std::string& path, const Dataset& d);

// Raw image container: magic "DSR1"; little-endian u32 N, C, H, W,
// class_count; N u8 labels; N*C*H*W u8 pixels. Pixels load as f64 in [0,1].
Dataset load_raw_images(const std::string& path);
void write_raw_images(const std::string& path, const Dataset& d);

// Gaussian blobs around class means on the unit circle in the first two
// feature dims (dim >= 2) or at 2*c on the line (dim == 1).
Dataset synth_blobs(int classes, int per_class, int dim, double spread,
                    uint64_t seed);
// Interleaved spirals in 2-D, winding 1.75 turns, radius 0.15..1.
Dataset synth_spirals(int classes, int per_class, double noise, uint64_t seed);

// Per-feature standardization: mean/std fitted on `train` only, applied to
// `train` and every dataset in `others`. Features with std < 1e-12 are left
// untouched.
void standardize(Dataset& train, std::span<Dataset* const> others = {});

// Stratified fold assignment; per-class counts across folds differ by <= 1.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold id per sample, in [0, k)
  uint64_t seed = 0;

  std::vector<int> train_indices(int fold) const;
  std::vector<int> val_indices(int fold) const;
};

// Requires every class to have at least k samples.
FoldPlan kfold(const Dataset& d, int k, uint64_t seed);

// Epoch-seeded shuffle (seed xor epoch) chunked into batches; every index
// appears exactly once, the last batch may be short.
std::vector<std::vector<int>> batches(int64_t n, int batch_size, uint64_t seed,
                                      int epoch);

}  // namespace actlab

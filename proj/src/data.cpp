#include "actlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace actlab {

void Dataset::validate() const {
  if (features.rank() != 2) {
    throw std::invalid_argument("dataset features must be [N×D]");
  }
  if (int64_t(labels.size()) != size()) {
    throw std::invalid_argument("dataset label count does not match rows");
  }
  if (class_count < 2) {
    throw std::invalid_argument("dataset needs at least 2 classes, got " +
                                std::to_string(class_count));
  }
  for (int l : labels) {
    if (l < 0 || l >= class_count) {
      throw std::invalid_argument("dataset label " + std::to_string(l) +
                                  " out of range [0," +
                                  std::to_string(class_count) + ")");
    }
  }
  if (image_shape) {
    const auto& s = *image_shape;
    if (int64_t(s[0]) * s[1] * s[2] != feature_dim()) {
      throw std::invalid_argument("dataset image shape does not match D");
    }
  }
  require_finite(features, "dataset features");
}

std::vector<int> Dataset::class_histogram() const {
  std::vector<int> h(size_t(class_count), 0);
  for (int l : labels) h[size_t(l)] += 1;
  return h;
}

Dataset Dataset::subset(std::span<const int> indices) const {
  const int64_t d = feature_dim();
  Tensor f({int(indices.size()), int(d)});
  std::vector<int> lab(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    std::copy_n(features.data().begin() + size_t(idx) * size_t(d), size_t(d),
                f.data().begin() + i * size_t(d));
    lab[i] = labels[size_t(idx)];
  }
  Dataset out{std::move(f), image_shape, std::move(lab), class_count, name};
  return out;
}

std::pair<Tensor, std::vector<int>> Dataset::batch(
    std::span<const int> indices) const {
  Dataset s = subset(indices);
  return {std::move(s.features), std::move(s.labels)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, int64_t row, size_t col) {
  try {
    size_t pos = 0;
    const double v = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace((unsigned char)cell[pos])) ++pos;
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: non-numeric cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " +
                             std::to_string(col));
  }
}

int parse_label(double v, int64_t row) {
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 || r < 0.0) {
    throw std::runtime_error("csv: label at row " + std::to_string(row) +
                             " is not a nonnegative integer");
  }
  return int(r);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  std::vector<double> values;
  std::vector<int> labels;
  int64_t width = -1;
  int64_t row = 0;
  bool header_skipped = !opts.skip_header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    const auto cells = split_line(line);
    if (width < 0) {
      width = int64_t(cells.size());
      if (width < 2) {
        throw std::runtime_error("csv: need at least one feature and a label");
      }
    } else if (int64_t(cells.size()) != width) {
      throw std::runtime_error(
          "csv: ragged row " + std::to_string(row) + " has " +
          std::to_string(cells.size()) + " columns, expected " +
          std::to_string(width));
    }
    const size_t label_col =
        opts.label_index ? size_t(*opts.label_index) : size_t(width - 1);
    if (label_col >= size_t(width)) {
      throw std::runtime_error("csv: label column " +
                               std::to_string(label_col) +
                               " out of range for width " +
                               std::to_string(width));
    }
    for (size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row, c);
      if (c == label_col) {
        labels.push_back(parse_label(v, row));
      } else {
        values.push_back(v);
      }
    }
    ++row;
  }
  if (row == 0) throw std::runtime_error("csv: '" + path + "' has no data rows");
  const int64_t d = width - 1;
  int class_count = opts.expected_classes;
  if (class_count <= 0) {
    class_count = *std::max_element(labels.begin(), labels.end()) + 1;
    class_count = std::max(class_count, 2);
  } else {
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= class_count) {
        throw std::runtime_error(
            "csv: label " + std::to_string(labels[i]) + " at row " +
            std::to_string(i) + " out of declared range [0," +
            std::to_string(class_count) + ")");
      }
    }
  }
  Tensor features({int(row), int(d)}, std::move(values));
  require_finite(features, "csv features");
  Dataset out{std::move(features), std::nullopt, std::move(labels),
              class_count, std::filesystem::path(path).stem().string()};
  out.validate();
  return out;
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  const int64_t dim = d.feature_dim();
  char buf[48];
  for (int64_t i = 0; i < d.size(); ++i) {
    for (int64_t j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.features[i * dim + j]);
      out << buf << ',';
    }
    out << d.labels[size_t(i)] << '\n';
  }
  if (!out) throw std::runtime_error("csv: write to '" + path + "' failed");
}

namespace {

constexpr char kRawMagic[4] = {'D', 'S', 'R', '1'};

uint32_t read_u32_le(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

void write_u32_le(std::ofstream& out, uint32_t v) {
  const unsigned char b[4] = {(unsigned char)(v & 0xff),
                              (unsigned char)((v >> 8) & 0xff),
                              (unsigned char)((v >> 16) & 0xff),
                              (unsigned char)((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_raw_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("raw: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kRawMagic, 4) != 0) {
    throw std::runtime_error("raw: '" + path + "' has a bad magic header");
  }
  const uint32_t n = read_u32_le(&bytes[4]);
  const uint32_t c = read_u32_le(&bytes[8]);
  const uint32_t h = read_u32_le(&bytes[12]);
  const uint32_t w = read_u32_le(&bytes[16]);
  const uint32_t classes = read_u32_le(&bytes[20]);
  const uint64_t pixels = uint64_t(n) * c * h * w;
  const uint64_t expected = 24 + uint64_t(n) + pixels;
  if (bytes.size() != expected) {
    throw std::runtime_error("raw: '" + path + "' truncated, expected " +
                             std::to_string(expected) + " bytes, got " +
                             std::to_string(bytes.size()));
  }
  std::vector<int> labels(n);
  for (uint32_t i = 0; i < n; ++i) labels[i] = int(bytes[24 + i]);
  std::vector<double> values(pixels);
  const unsigned char* px = bytes.data() + 24 + n;
  for (uint64_t i = 0; i < pixels; ++i) values[i] = double(px[i]) / 255.0;
  Tensor features({int(n), int(c * h * w)}, std::move(values));
  Dataset out{std::move(features),
              std::array<int, 3>{int(c), int(h), int(w)},
              std::move(labels),
              int(classes),
              std::filesystem::path(path).stem().string()};
  out.validate();
  return out;
}

void write_raw_images(const std::string& path, const Dataset& d) {
  if (!d.image_shape) {
    throw std::invalid_argument("raw: dataset has no image shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("raw: cannot write '" + path + "'");
  out.write(kRawMagic, 4);
  write_u32_le(out, uint32_t(d.size()));
  write_u32_le(out, uint32_t((*d.image_shape)[0]));
  write_u32_le(out, uint32_t((*d.image_shape)[1]));
  write_u32_le(out, uint32_t((*d.image_shape)[2]));
  write_u32_le(out, uint32_t(d.class_count));
  for (int l : d.labels) out.put(char((unsigned char)l));
  for (double v : d.features.data()) {
    const double scaled = std::clamp(std::round(v * 255.0), 0.0, 255.0);
    out.put(char((unsigned char)scaled));
  }
  if (!out) throw std::runtime_error("raw: write to '" + path + "' failed");
}

Dataset synth_blobs(int classes, int per_class, int dim, double spread,
                    uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("blobs: need >= 2 classes");
  if (per_class < 1 || dim < 1) {
    throw std::invalid_argument("blobs: per_class and dim must be >= 1");
  }
  constexpr double kTau = 6.283185307179586476925286766559;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<double> values;
  values.reserve(size_t(classes) * per_class * dim);
  std::vector<int> labels;
  labels.reserve(size_t(classes) * per_class);
  for (int c = 0; c < classes; ++c) {
    std::vector<double> mean(size_t(dim), 0.0);
    if (dim == 1) {
      mean[0] = 2.0 * c;
    } else {
      mean[0] = std::cos(kTau * c / classes);
      mean[1] = std::sin(kTau * c / classes);
    }
    for (int i = 0; i < per_class; ++i) {
      for (int d2 = 0; d2 < dim; ++d2) {
        values.push_back(mean[size_t(d2)] + (spread > 0.0 ? noise(rng) : 0.0));
      }
      labels.push_back(c);
    }
  }
  Tensor features({classes * per_class, dim}, std::move(values));
  Dataset out{std::move(features), std::nullopt, std::move(labels), classes,
              "blobs"};
  out.validate();
  return out;
}

Dataset synth_spirals(int classes, int per_class, double noise_sd,
                      uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("spirals: need >= 2 classes");
  if (per_class < 1) throw std::invalid_argument("spirals: per_class >= 1");
  constexpr double kTau = 6.283185307179586476925286766559;
  constexpr double kWinds = 1.75;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::vector<double> values;
  values.reserve(size_t(classes) * per_class * 2);
  std::vector<int> labels;
  labels.reserve(size_t(classes) * per_class);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const double u = per_class > 1 ? double(i) / double(per_class - 1) : 0.0;
      const double r = 0.15 + 0.85 * u;
      const double theta = kWinds * kTau * u + kTau * c / classes;
      double x = r * std::cos(theta);
      double y = r * std::sin(theta);
      if (noise_sd > 0.0) {
        x += noise(rng);
        y += noise(rng);
      }
      values.push_back(x);
      values.push_back(y);
      labels.push_back(c);
    }
  }
  Tensor features({classes * per_class, 2}, std::move(values));
  Dataset out{std::move(features), std::nullopt, std::move(labels), classes,
              "spirals"};
  out.validate();
  return out;
}

void standardize(Dataset& train, std::span<Dataset* const> others) {
  const int64_t n = train.size(), d = train.feature_dim();
  if (n == 0) throw std::invalid_argument("standardize: empty training set");
  for (Dataset* o : others) {
    if (o->feature_dim() != d) {
      throw std::invalid_argument("standardize: feature dims disagree");
    }
  }
  std::vector<double> mean(size_t(d), 0.0), sd(size_t(d), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < d; ++j) mean[size_t(j)] += train.features[i * d + j];
  }
  for (int64_t j = 0; j < d; ++j) mean[size_t(j)] /= double(n);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < d; ++j) {
      const double dv = train.features[i * d + j] - mean[size_t(j)];
      sd[size_t(j)] += dv * dv;
    }
  }
  for (int64_t j = 0; j < d; ++j) sd[size_t(j)] = std::sqrt(sd[size_t(j)] / double(n));

  auto apply = [&](Dataset& ds) {
    const int64_t rows = ds.size();
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < d; ++j) {
        if (sd[size_t(j)] < 1e-12) continue;  // constant feature, untouched
        double& v = ds.features.data()[size_t(i * d + j)];
        v = (v - mean[size_t(j)]) / sd[size_t(j)];
      }
    }
  };
  apply(train);
  for (Dataset* o : others) apply(*o);
}

std::vector<int> FoldPlan::train_indices(int fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(int(i));
  }
  return out;
}

std::vector<int> FoldPlan::val_indices(int fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(int(i));
  }
  return out;
}

FoldPlan kfold(const Dataset& d, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  const auto hist = d.class_histogram();
  for (int c = 0; c < d.class_count; ++c) {
    if (hist[size_t(c)] < k) {
      throw std::invalid_argument(
          "kfold: class " + std::to_string(c) + " has only " +
          std::to_string(hist[size_t(c)]) + " samples, fewer than k=" +
          std::to_string(k));
    }
  }
  std::mt19937_64 rng(seed);
  FoldPlan plan{k, std::vector<int>(size_t(d.size()), -1), seed};
  for (int c = 0; c < d.class_count; ++c) {
    std::vector<int> idx;
    for (int64_t i = 0; i < d.size(); ++i) {
      if (d.labels[size_t(i)] == c) idx.push_back(int(i));
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    // Rotate the starting fold by class so leftovers spread out.
    for (size_t i = 0; i < idx.size(); ++i) {
      plan.assignments[size_t(idx[i])] = int((i + size_t(c)) % size_t(k));
    }
  }
  return plan;
}

std::vector<std::vector<int>> batches(int64_t n, int batch_size, uint64_t seed,
                                      int epoch) {
  if (batch_size < 1) throw std::invalid_argument("batches: batch_size >= 1");
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed ^ uint64_t(epoch));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<int>> out;
  for (int64_t start = 0; start < n; start += batch_size) {
    const int64_t end = std::min(n, start + batch_size);
    out.emplace_back(perm.begin() + size_t(start), perm.begin() + size_t(end));
  }
  return out;
}

}  // namespace actlab

/*
 * Copyright 2026 The vblab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vblab/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vblab/rng.hpp"

namespace vblab {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::filesystem::path& path) {
  require(offset + 4 <= bytes.size(), ErrorCode::Io, "truncated IDX header in '" + path.string() + "'");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

std::size_t infer_classes(const std::vector<Label>& labels) {
  Label max_label = 0;
  for (Label y : labels) max_label = std::max(max_label, y);
  return std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

Label parse_label(std::string_view text, const std::filesystem::path& path, std::size_t line_no) {
  long long value = 0;
  require(parse_number(text, value) && value >= 0 && value <= std::numeric_limits<Label>::max(),
          ErrorCode::Format,
          path.string() + ":" + std::to_string(line_no) + ": bad label '" + std::string(trim(text)) + "'");
  return static_cast<Label>(value);
}

}  // namespace

void LabeledDataset::validate() const {
  require(!labels.empty(), ErrorCode::ContractViolation, "dataset '" + name + "' is empty");
  require(features.cols() > 0, ErrorCode::ContractViolation, "dataset '" + name + "' has zero feature dimension");
  require(static_cast<std::size_t>(features.rows()) == labels.size(), ErrorCode::ContractViolation,
          "dataset '" + name + "': feature rows and label count differ");
  require(num_classes >= 2, ErrorCode::InvalidArgument, "dataset '" + name + "' needs K >= 2");
  for (Label y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < num_classes, ErrorCode::ContractViolation,
            "dataset '" + name + "': label " + std::to_string(y) + " outside [0, K)");
  }
  require(features.allFinite(), ErrorCode::ContractViolation, "dataset '" + name + "' has non-finite features");
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices, std::string subset_name) const {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.push_back(labels[indices[r]]);
  }
  out.num_classes = num_classes;
  out.name = std::move(subset_name);
  return out;
}

LabeledDataset gen_gaussian_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                                  double separation, std::uint64_t seed) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "blobs need K >= 2");
  require(per_class >= 1, ErrorCode::InvalidArgument, "blobs need per_class >= 1");
  require(dim >= 2, ErrorCode::InvalidArgument, "blobs need d >= 2");
  require(std::isfinite(separation) && separation > 0.0, ErrorCode::InvalidArgument, "blobs need separation > 0");

  const auto d = static_cast<Eigen::Index>(dim);
  CounterRng mean_rng(derive_seed(seed, purpose_tag("blob-means")), 0);
  std::vector<RowVector> means;
  constexpr int kMaxAttempts = 10000;
  for (std::size_t c = 0; c < num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      RowVector direction(d);
      for (Eigen::Index j = 0; j < d; ++j) direction[j] = mean_rng.normal();
      const double norm = direction.norm();
      if (norm == 0.0) continue;
      RowVector mean = direction * (separation / norm);
      placed = std::all_of(means.begin(), means.end(),
                           [&](const RowVector& other) { return (other - mean).norm() >= 0.5 * separation; });
      if (placed) means.push_back(std::move(mean));
    }
    require(placed, ErrorCode::InvalidArgument,
            "cannot place " + std::to_string(num_classes) + " blob means in d=" + std::to_string(dim) +
                " with pairwise distance >= separation/2");
  }

  LabeledDataset ds;
  ds.name = "blobs";
  ds.num_classes = num_classes;
  ds.features.resize(static_cast<Eigen::Index>(num_classes * per_class), d);
  ds.labels.reserve(num_classes * per_class);
  const std::uint64_t sample_seed = derive_seed(seed, purpose_tag("blob-samples"));
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = c * per_class + i;
      CounterRng rng(sample_seed, row);
      for (Eigen::Index j = 0; j < d; ++j) {
        ds.features(static_cast<Eigen::Index>(row), j) = means[c][j] + rng.normal();
      }
      ds.labels.push_back(static_cast<Label>(c));
    }
  }
  return ds;
}

std::vector<Label> load_idx_labels(const std::filesystem::path& labels_path) {
  const auto bytes = read_bytes(labels_path);
  const auto magic = read_be32(bytes, 0, labels_path);
  require(magic == kIdxLabelsMagic, ErrorCode::Format,
          "'" + labels_path.string() + "': expected IDX labels magic 0x00000801, got " + hex32(magic));
  const std::size_t count = read_be32(bytes, 4, labels_path);
  require(bytes.size() >= 8 + count, ErrorCode::Io, "'" + labels_path.string() + "' is truncated");
  std::vector<Label> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = bytes[8 + i];
  return labels;
}

LabeledDataset load_idx_images(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path) {
  const auto bytes = read_bytes(images_path);
  const auto magic = read_be32(bytes, 0, images_path);
  require(magic == kIdxImagesMagic, ErrorCode::Format,
          "'" + images_path.string() + "': expected IDX images magic 0x00000803, got " + hex32(magic));
  const std::size_t count = read_be32(bytes, 4, images_path);
  const std::size_t rows = read_be32(bytes, 8, images_path);
  const std::size_t cols = read_be32(bytes, 12, images_path);
  const std::size_t pixels = rows * cols;
  require(pixels > 0, ErrorCode::Format, "'" + images_path.string() + "' has empty images");
  require(bytes.size() >= 16 + count * pixels, ErrorCode::Io, "'" + images_path.string() + "' is truncated");

  auto labels = load_idx_labels(labels_path);
  require(labels.size() == count, ErrorCode::Consistency,
          "image count " + std::to_string(count) + " does not match label count " + std::to_string(labels.size()));

  LabeledDataset ds;
  ds.name = images_path.stem().string();
  ds.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t p = 0; p < pixels; ++p) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = bytes[16 + i * pixels + p] / 255.0;
    }
  }
  ds.labels = std::move(labels);
  ds.num_classes = infer_classes(ds.labels);
  ds.validate();
  return ds;
}

std::vector<Label> load_label_file(const std::filesystem::path& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    require(static_cast<bool>(probe), ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::array<char, 4> head{};
    probe.read(head.data(), 4);
    if (probe.gcount() == 4 && head[0] == 0 && head[1] == 0 && head[2] == 8 && head[3] == 1) {
      return load_idx_labels(path);
    }
  }
  std::ifstream in(path);
  std::vector<Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    long long probe = 0;
    if (line_no == 1 && !parse_number(fields.back(), probe)) continue;  // header
    labels.push_back(parse_label(fields.back(), path, line_no));
  }
  require(!labels.empty(), ErrorCode::Format, "'" + path.string() + "' contains no labels");
  return labels;
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& ds) {
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[32];
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), ds.features(i, j));
      out.write(buf, end - buf);
      out << ',';
    }
    out << ds.labels[static_cast<std::size_t>(i)] << '\n';
  }
}

void save_dataset_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_dataset_csv(out, ds);
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for '" + path.string() + "'");
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<double> values;
  std::vector<Label> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    double probe = 0.0;
    if (line_no == 1 && !parse_number(fields.front(), probe)) continue;  // header
    require(fields.size() >= 2, ErrorCode::Format, path.string() + ":" + std::to_string(line_no) + ": too few columns");
    if (width == 0) width = fields.size() - 1;
    require(fields.size() - 1 == width, ErrorCode::Format,
            path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    for (std::size_t j = 0; j < width; ++j) {
      double v = 0.0;
      require(parse_number(fields[j], v), ErrorCode::Format,
              path.string() + ":" + std::to_string(line_no) + ": bad number '" + std::string(fields[j]) + "'");
      values.push_back(v);
    }
    labels.push_back(parse_label(fields.back(), path, line_no));
  }
  LabeledDataset ds;
  ds.name = path.stem().string();
  ds.features = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(labels.size()),
                                   static_cast<Eigen::Index>(width));
  ds.labels = std::move(labels);
  ds.num_classes = num_classes == 0 ? infer_classes(ds.labels) : num_classes;
  ds.validate();
  return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, double test_fraction,
                                                          std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::InvalidArgument,
          "test_fraction must lie in (0, 1)");
  ds.validate();
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  CounterRng rng(derive_seed(seed, purpose_tag("split")), 0);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    require(members.size() >= 2, ErrorCode::Stratification,
            "class " + std::to_string(c) + " has fewer than 2 samples; cannot stratify");
    for (std::size_t i = members.size() - 1; i > 0; --i) std::swap(members[i], members[rng.below(i + 1)]);
    const auto n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction)), 1,
        members.size() - 1);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx, ds.name + "-train"), ds.subset(test_idx, ds.name + "-test")};
}

Standardizer Standardizer::fit(const Matrix& features) {
  require(features.rows() > 0, ErrorCode::ContractViolation, "cannot standardize an empty matrix");
  Standardizer s;
  s.mean_ = features.colwise().mean();
  const Matrix centered = features.rowwise() - s.mean_;
  s.scale_ = (centered.array().square().colwise().sum() / static_cast<double>(features.rows())).sqrt().matrix();
  for (Eigen::Index j = 0; j < s.scale_.size(); ++j) {
    if (!(s.scale_[j] > 0.0)) s.scale_[j] = 1.0;
  }
  return s;
}

void Standardizer::apply(Matrix& features) const {
  require(features.cols() == mean_.size(), ErrorCode::ContractViolation, "standardizer dimension mismatch");
  features = ((features.rowwise() - mean_).array().rowwise() / scale_.array()).matrix();
}

}  // namespace vblab

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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vblab/common.hpp"

namespace vblab {

/// N x d features with one class index per row.
struct LabeledDataset {
  Matrix features;
  std::vector<Label> labels;
  std::size_t num_classes = 0;
  std::string name;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

  /// N > 0, d > 0, K >= 2, rows == labels, labels in [0, K), features finite.
  void validate() const;
  /// Rows selected by `indices`, in that order.
  LabeledDataset subset(const std::vector<std::size_t>& indices, std::string subset_name) const;
};

/// K unit-variance isotropic Gaussians. Means sit at separation * (random unit
/// direction), redrawn until pairwise distances are >= separation / 2.
/// Samples are grouped by class: labels are 0,..,0,1,..,1,...
LabeledDataset gen_gaussian_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                                  double separation, std::uint64_t seed);

/// IDX pair (magic 0x00000803 images, 0x00000801 labels), pixels scaled to [0, 1].
/// K is inferred as max(label) + 1 (at least 2).
LabeledDataset load_idx_images(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path);
/// Labels-only IDX file (magic 0x00000801).
std::vector<Label> load_idx_labels(const std::filesystem::path& labels_path);

/// Label list from an IDX labels file, a dataset CSV (last column) or a
/// plain text file with one label per line.
std::vector<Label> load_label_file(const std::filesystem::path& path);

/// CSV "f0,...,f{d-1},label". num_classes == 0 infers max(label) + 1.
void write_dataset_csv(std::ostream& out, const LabeledDataset& ds);
void save_dataset_csv(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes = 0);

/// Stratified shuffle split. Each class contributes round(n_c * test_fraction)
/// samples (at least 1, at most n_c - 1) to the test split.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, double test_fraction,
                                                          std::uint64_t seed);

/// Per-dimension affine standardization fitted on one matrix and applied to
/// others. Constant columns keep scale 1.
class Standardizer {
 public:
  static Standardizer fit(const Matrix& features);
  void apply(Matrix& features) const;

  const RowVector& mean() const noexcept { return mean_; }
  const RowVector& scale() const noexcept { return scale_; }

 private:
  RowVector mean_;
  RowVector scale_;
};

}  // namespace vblab

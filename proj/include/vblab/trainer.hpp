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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vblab/common.hpp"
#include "vblab/data.hpp"
#include "vblab/losses.hpp"
#include "vblab/nn.hpp"
#include "vblab/noise.hpp"

namespace vblab {

struct DatasetConfig {
  enum class Source { Blobs, Idx, Csv };

  Source source = Source::Blobs;
  // blobs
  std::size_t num_classes = 10;
  std::size_t per_class = 1000;
  std::size_t dim = 20;
  double separation = 8.0;
  // idx / csv
  std::string images_path;
  std::string labels_path;
  std::string csv_path;

  double test_fraction = 0.2;
  bool standardize = true;
};

std::string_view to_string(DatasetConfig::Source source) noexcept;

struct ExperimentConfig {
  DatasetConfig dataset;
  NoiseModel noise;
  LossSpec loss = LossSpec::ce();
  std::vector<std::size_t> hidden{128, 128};
  OptimizerConfig optimizer;  // total_epochs is taken from `epochs`
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 123;
  std::size_t eval_every = 1;
  std::size_t ece_bins = 10;
  // Training is single-threaded per run, so every run is reproducible; the
  // flag is recorded for provenance.
  bool deterministic = true;

  void validate() const;
};

/// Overrides one sweepable parameter: loss.a, loss.alpha, loss.beta, noise.eta.
ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view parameter, double value);

struct MetricsRecord {
  std::size_t epoch = 0;  // 1-based count of completed epochs
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double test_ece = 0.0;
  double lr = 0.0;
};

struct RunSummary {
  double best_acc = 0.0;
  double last_acc = 0.0;
  double gap = 0.0;  // best - last
  std::size_t best_epoch = 0;
  double wall_seconds = 0.0;
};

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double avg_conf = 0.0;
  double avg_acc = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsRecord> metrics;
  RunSummary summary;
  std::vector<ReliabilityBin> reliability;  // from the last evaluation
  std::optional<MlpModel> model;
  double train_flip_fraction = 0.0;
  bool diverged = false;
  std::string diagnostic;
};

/// Clean train/test splits ready for training (standardized when configured).
struct PreparedData {
  LabeledDataset train;
  LabeledDataset test;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// Corrupts the train labels once, trains with per-epoch shuffling and
/// evaluates on the clean test split every eval_every epochs (and after the
/// final epoch). Divergence stops training and returns the partial series
/// with diverged = true.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreparedData& data);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double compute_accuracy(const Matrix& probs, std::span<const Label> labels);
/// Expected calibration error over n_bins equal-width right-closed bins.
double compute_ece(const Matrix& probs, std::span<const Label> labels, std::size_t n_bins);
std::vector<ReliabilityBin> reliability_diagram(const Matrix& probs, std::span<const Label> labels,
                                                std::size_t n_bins);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  RunSummary summary;
  bool diverged = false;
};

/// One run per value with seed = base.seed + index * 1000; runs are spread
/// over `jobs` worker threads and returned in value order.
std::vector<SweepRow> sweep(const ExperimentConfig& base, std::string_view parameter, std::span<const double> values,
                            std::size_t jobs = 1);

/// "epoch,train_loss,test_acc,test_ece,lr"
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> metrics);
/// "bin_lo,bin_hi,count,avg_conf,avg_acc"
void write_reliability_csv(std::ostream& out, std::span<const ReliabilityBin> bins);
/// "value,seed,best_acc,last_acc,gap,diverged"
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace vblab

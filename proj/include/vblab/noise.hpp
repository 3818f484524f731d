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
#include <span>
#include <string_view>
#include <vector>

#include "vblab/common.hpp"
#include "vblab/data.hpp"

namespace vblab {

enum class NoiseKind { Symmetric, AsymmetricCircular, InstanceDependent };

std::string_view to_string(NoiseKind kind) noexcept;
/// "symmetric" | "asymmetric" (alias "circular") | "instance" (alias "idn", "pdn").
NoiseKind parse_noise_kind(std::string_view name);

/// Label-noise process. eta is the target overall flip rate.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Symmetric;
  double eta = 0.0;
  double rate_std = 0.1;  // instance-dependent only

  /// eta in [0, 1); instance-dependent additionally eta <= 0.6 and rate_std >= 0.
  static NoiseModel make(NoiseKind kind, double eta, double rate_std = 0.1);
  static NoiseModel symmetric(double eta) { return make(NoiseKind::Symmetric, eta); }
  static NoiseModel asymmetric_circular(double eta) { return make(NoiseKind::AsymmetricCircular, eta); }
  static NoiseModel instance_dependent(double eta, double rate_std = 0.1) {
    return make(NoiseKind::InstanceDependent, eta, rate_std);
  }

  /// Analytic clean-label dominance 1 - eta_x > max_{k != y} eta_{x,k}.
  /// Always false for instance-dependent noise (only realized rates can tell).
  bool analytically_clean_dominant(std::size_t num_classes) const;
};

struct CorruptionRecord {
  std::vector<Label> noisy_labels;
  std::vector<std::uint8_t> flip_mask;  // 1 iff noisy != clean
  // Instance-dependent only: q_i and max_{k != y_i} eta_{i,k} per instance.
  std::vector<double> realized_rates;
  std::vector<double> realized_max_flip;

  std::size_t size() const noexcept { return noisy_labels.size(); }
  double flip_fraction() const;
};

CorruptionRecord corrupt_symmetric(std::span<const Label> labels, std::size_t num_classes, double eta,
                                   std::uint64_t seed);
CorruptionRecord corrupt_asymmetric_circular(std::span<const Label> labels, std::size_t num_classes, double eta,
                                             std::uint64_t seed);
/// Part-dependent style instance noise:
///   q_i ~ Normal(eta, rate_std) truncated to [0, 1]
///   W_c ~ N(0, 1)^{d x K} for each class c
///   p = softmax(x_i W_{y_i}) with p_{y_i} = 0, scaled by q_i; p_{y_i} = 1 - q_i
///   noisy label ~ p
CorruptionRecord corrupt_instance_dependent(const Matrix& features, std::span<const Label> labels,
                                            std::size_t num_classes, double eta, double rate_std,
                                            std::uint64_t seed);
/// One row of the instance-dependent transition: q * softmax(x W) over the
/// wrong classes, 1 - q on the clean class. `projection` is d x K.
RowVector instance_transition_row(const RowVector& x, Label clean, const Matrix& projection, double q);
/// Dispatch on model.kind. Instance-dependent noise needs the features.
CorruptionRecord corrupt(const NoiseModel& model, const LabeledDataset& ds, std::uint64_t seed);
CorruptionRecord corrupt_labels(const NoiseModel& model, std::span<const Label> labels, std::size_t num_classes,
                                std::uint64_t seed);

/// Row y is the empirical distribution of noisy labels among clean label y.
Matrix empirical_transition_matrix(std::span<const Label> clean, std::span<const Label> noisy,
                                   std::size_t num_classes);
/// Closed-form transition matrix for symmetric and circular noise.
Matrix analytic_transition_matrix(const NoiseModel& model, std::size_t num_classes);

/// Per-instance noise structure needed by the excess-risk bound and the
/// asymmetry threshold: with eta_x the flip rate and m_x = max_{k != y} eta_{x,k},
///   mean_clean_rate = E[1 - eta_x]
///   min_margin      = min_x (1 - eta_x - m_x)     (> 0 iff clean-label dominant)
///   worst_ratio     = min_x (1 - eta_x) / m_x     (inf when m_x = 0 everywhere)
struct NoiseProfile {
  double mean_clean_rate = 1.0;
  double min_margin = 1.0;
  ExtendedReal worst_ratio = ExtendedReal::infinity();

  bool clean_dominant() const noexcept { return min_margin > 0.0; }
};

/// Exact profile for symmetric / circular noise.
NoiseProfile analytic_noise_profile(const NoiseModel& model, std::size_t num_classes);
/// Sample profile from an instance-dependent corruption record.
NoiseProfile realized_noise_profile(const CorruptionRecord& record);

/// CSV "index,clean_label,noisy_label,flipped[,realized_rate]".
void write_corruption_csv(std::ostream& out, std::span<const Label> clean, const CorruptionRecord& record);

}  // namespace vblab

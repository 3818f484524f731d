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

#include "vblab/noise.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "vblab/rng.hpp"

namespace vblab {

namespace {

constexpr double kMaxInstanceEta = 0.6;

void check_labels(std::span<const Label> labels, std::size_t num_classes) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "label noise needs K >= 2");
  for (Label y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < num_classes, ErrorCode::InvalidArgument,
            "label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
  }
}

void check_eta(double eta) {
  require(std::isfinite(eta) && eta >= 0.0 && eta < 1.0, ErrorCode::InvalidArgument,
          "noise rate eta must lie in [0, 1), got " + std::to_string(eta));
}

CorruptionRecord finish(std::span<const Label> clean, std::vector<Label> noisy) {
  CorruptionRecord record;
  record.flip_mask.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) record.flip_mask[i] = noisy[i] != clean[i] ? 1 : 0;
  record.noisy_labels = std::move(noisy);
  return record;
}

double truncated_normal_unit(CounterRng& rng, double mean, double stddev) {
  if (stddev == 0.0) return std::clamp(mean, 0.0, 1.0);
  constexpr int kMaxTries = 1000;
  for (int t = 0; t < kMaxTries; ++t) {
    const double q = mean + stddev * rng.normal();
    if (q >= 0.0 && q <= 1.0) return q;
  }
  return std::clamp(mean, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::Symmetric: return "symmetric";
    case NoiseKind::AsymmetricCircular: return "asymmetric";
    case NoiseKind::InstanceDependent: return "instance";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "symmetric" || lower == "sym") return NoiseKind::Symmetric;
  if (lower == "asymmetric" || lower == "circular" || lower == "asym") return NoiseKind::AsymmetricCircular;
  if (lower == "instance" || lower == "idn" || lower == "pdn" || lower == "instance-dependent") {
    return NoiseKind::InstanceDependent;
  }
  fail(ErrorCode::InvalidArgument, "unknown noise kind '" + std::string(name) + "'");
}

NoiseModel NoiseModel::make(NoiseKind kind, double eta, double rate_std) {
  check_eta(eta);
  if (kind == NoiseKind::InstanceDependent) {
    require(eta <= kMaxInstanceEta, ErrorCode::InvalidArgument, "instance-dependent noise requires eta <= 0.6");
    require(std::isfinite(rate_std) && rate_std >= 0.0, ErrorCode::InvalidArgument, "rate_std must be >= 0");
  }
  return NoiseModel{kind, eta, rate_std};
}

bool NoiseModel::analytically_clean_dominant(std::size_t num_classes) const {
  switch (kind) {
    case NoiseKind::Symmetric:
    case NoiseKind::AsymmetricCircular: return analytic_noise_profile(*this, num_classes).clean_dominant();
    case NoiseKind::InstanceDependent: return false;
  }
  return false;
}

double CorruptionRecord::flip_fraction() const {
  require(!flip_mask.empty(), ErrorCode::ContractViolation, "empty corruption record");
  std::size_t flips = 0;
  for (auto f : flip_mask) flips += f;
  return static_cast<double>(flips) / static_cast<double>(flip_mask.size());
}

CorruptionRecord corrupt_symmetric(std::span<const Label> labels, std::size_t num_classes, double eta,
                                   std::uint64_t seed) {
  check_eta(eta);
  check_labels(labels, num_classes);
  const std::uint64_t key = derive_seed(seed, purpose_tag("noise-symmetric"));
  std::vector<Label> noisy(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CounterRng rng(key, i);
    if (rng.uniform() < eta) {
      const auto offset = 1 + rng.below(num_classes - 1);
      noisy[i] = static_cast<Label>((static_cast<std::size_t>(labels[i]) + offset) % num_classes);
    }
  }
  return finish(labels, std::move(noisy));
}

CorruptionRecord corrupt_asymmetric_circular(std::span<const Label> labels, std::size_t num_classes, double eta,
                                             std::uint64_t seed) {
  check_eta(eta);
  check_labels(labels, num_classes);
  const std::uint64_t key = derive_seed(seed, purpose_tag("noise-circular"));
  std::vector<Label> noisy(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CounterRng rng(key, i);
    if (rng.uniform() < eta) noisy[i] = static_cast<Label>((static_cast<std::size_t>(labels[i]) + 1) % num_classes);
  }
  return finish(labels, std::move(noisy));
}

RowVector instance_transition_row(const RowVector& x, Label clean, const Matrix& projection, double q) {
  require(projection.rows() == x.size(), ErrorCode::ContractViolation, "projection rows must equal feature dimension");
  const auto y = static_cast<Eigen::Index>(clean);
  RowVector row = x * projection;
  row[y] = -std::numeric_limits<double>::infinity();
  const double top = row.maxCoeff();
  row = (row.array() - top).exp().matrix();
  row *= q / row.sum();
  row[y] = 1.0 - q;
  return row;
}

CorruptionRecord corrupt_instance_dependent(const Matrix& features, std::span<const Label> labels,
                                            std::size_t num_classes, double eta, double rate_std,
                                            std::uint64_t seed) {
  const auto model = NoiseModel::instance_dependent(eta, rate_std);
  check_labels(labels, num_classes);
  require(static_cast<std::size_t>(features.rows()) == labels.size(), ErrorCode::ContractViolation,
          "feature rows and label count differ");
  require(features.allFinite(), ErrorCode::ContractViolation, "features must be finite");

  const auto d = features.cols();
  const auto k = static_cast<Eigen::Index>(num_classes);
  std::vector<Matrix> projections(num_classes, Matrix(d, k));
  const std::uint64_t projection_key = derive_seed(seed, purpose_tag("pdn-projection"));
  for (std::size_t c = 0; c < num_classes; ++c) {
    CounterRng rng(projection_key, c);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index j = 0; j < k; ++j) projections[c](r, j) = rng.normal();
    }
  }

  const std::uint64_t instance_key = derive_seed(seed, purpose_tag("pdn-instance"));
  std::vector<Label> noisy(labels.size());
  std::vector<double> rates(labels.size());
  std::vector<double> max_flip(labels.size());
  RowVector transition(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CounterRng rng(instance_key, i);
    const auto y = static_cast<Eigen::Index>(labels[i]);
    const double q = truncated_normal_unit(rng, model.eta, model.rate_std);

    transition = instance_transition_row(features.row(static_cast<Eigen::Index>(i)), labels[i],
                                         projections[static_cast<std::size_t>(y)], q);
    max_flip[i] = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != y) max_flip[i] = std::max(max_flip[i], transition[j]);
    }

    const double draw = rng.uniform();
    double cumulative = 0.0;
    Eigen::Index chosen = y;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (transition[j] == 0.0) continue;
      cumulative += transition[j];
      chosen = j;
      if (draw < cumulative) break;
    }
    noisy[i] = static_cast<Label>(chosen);
    rates[i] = q;
  }
  auto record = finish(labels, std::move(noisy));
  record.realized_rates = std::move(rates);
  record.realized_max_flip = std::move(max_flip);
  return record;
}

CorruptionRecord corrupt_labels(const NoiseModel& model, std::span<const Label> labels, std::size_t num_classes,
                                std::uint64_t seed) {
  switch (model.kind) {
    case NoiseKind::Symmetric: return corrupt_symmetric(labels, num_classes, model.eta, seed);
    case NoiseKind::AsymmetricCircular: return corrupt_asymmetric_circular(labels, num_classes, model.eta, seed);
    case NoiseKind::InstanceDependent: break;
  }
  fail(ErrorCode::InvalidArgument, "instance-dependent noise needs features; use corrupt() with a dataset");
}

CorruptionRecord corrupt(const NoiseModel& model, const LabeledDataset& ds, std::uint64_t seed) {
  if (model.kind == NoiseKind::InstanceDependent) {
    return corrupt_instance_dependent(ds.features, ds.labels, ds.num_classes, model.eta, model.rate_std, seed);
  }
  return corrupt_labels(model, ds.labels, ds.num_classes, seed);
}

Matrix empirical_transition_matrix(std::span<const Label> clean, std::span<const Label> noisy,
                                   std::size_t num_classes) {
  require(clean.size() == noisy.size(), ErrorCode::ContractViolation, "clean and noisy label counts differ");
  check_labels(clean, num_classes);
  check_labels(noisy, num_classes);
  const auto k = static_cast<Eigen::Index>(num_classes);
  Matrix counts = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < clean.size(); ++i) counts(clean[i], noisy[i]) += 1.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    const double total = counts.row(r).sum();
    require(total > 0.0, ErrorCode::DegenerateClass, "class " + std::to_string(r) + " never occurs in the clean labels");
    counts.row(r) /= total;
  }
  return counts;
}

Matrix analytic_transition_matrix(const NoiseModel& model, std::size_t num_classes) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "label noise needs K >= 2");
  const auto k = static_cast<Eigen::Index>(num_classes);
  Matrix t = Matrix::Zero(k, k);
  switch (model.kind) {
    case NoiseKind::Symmetric:
      t.setConstant(model.eta / static_cast<double>(num_classes - 1));
      t.diagonal().setConstant(1.0 - model.eta);
      return t;
    case NoiseKind::AsymmetricCircular:
      for (Eigen::Index r = 0; r < k; ++r) {
        t(r, r) = 1.0 - model.eta;
        t(r, (r + 1) % k) += model.eta;
      }
      return t;
    case NoiseKind::InstanceDependent: break;
  }
  fail(ErrorCode::Precondition, "instance-dependent noise has no closed-form transition matrix");
}

NoiseProfile analytic_noise_profile(const NoiseModel& model, std::size_t num_classes) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "label noise needs K >= 2");
  NoiseProfile profile;
  profile.mean_clean_rate = 1.0 - model.eta;
  switch (model.kind) {
    case NoiseKind::Symmetric: {
      const double others = static_cast<double>(num_classes - 1);
      profile.min_margin = 1.0 - model.eta - model.eta / others;
      // (1 - eta) / (eta / (K - 1)) written so that eta = 0.8, K = 10 gives 2.25 exactly.
      profile.worst_ratio =
          model.eta == 0.0 ? ExtendedReal::infinity() : ExtendedReal(others * (1.0 / model.eta - 1.0));
      return profile;
    }
    case NoiseKind::AsymmetricCircular:
      profile.min_margin = 1.0 - 2.0 * model.eta;
      profile.worst_ratio = model.eta == 0.0 ? ExtendedReal::infinity() : ExtendedReal(1.0 / model.eta - 1.0);
      return profile;
    case NoiseKind::InstanceDependent: break;
  }
  fail(ErrorCode::Precondition, "instance-dependent noise needs realized per-instance rates");
}

NoiseProfile realized_noise_profile(const CorruptionRecord& record) {
  require(!record.realized_rates.empty() && record.realized_rates.size() == record.realized_max_flip.size(),
          ErrorCode::Precondition, "corruption record carries no realized per-instance rates");
  NoiseProfile profile;
  double clean_sum = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  double ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < record.realized_rates.size(); ++i) {
    const double clean_rate = 1.0 - record.realized_rates[i];
    const double m = record.realized_max_flip[i];
    clean_sum += clean_rate;
    margin = std::min(margin, clean_rate - m);
    if (m > 0.0) ratio = std::min(ratio, clean_rate / m);
  }
  profile.mean_clean_rate = clean_sum / static_cast<double>(record.realized_rates.size());
  profile.min_margin = margin;
  profile.worst_ratio = ExtendedReal(ratio);
  return profile;
}

void write_corruption_csv(std::ostream& out, std::span<const Label> clean, const CorruptionRecord& record) {
  require(clean.size() == record.size(), ErrorCode::ContractViolation, "clean labels and record sizes differ");
  const bool with_rates = !record.realized_rates.empty();
  out << "index,clean_label,noisy_label,flipped" << (with_rates ? ",realized_rate" : "") << '\n';
  char buf[32];
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out << i << ',' << clean[i] << ',' << record.noisy_labels[i] << ',' << int{record.flip_mask[i]};
    if (with_rates) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), record.realized_rates[i]);
      out << ',';
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

}  // namespace vblab

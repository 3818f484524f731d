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

#include "vblab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vblab/rng.hpp"

namespace vblab {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack on v(L) <= w_t / w_i so that exact-boundary cases such as
// (1 + 0.4) / 0.4 vs 0.7 / 0.2 are not lost to rounding.
constexpr double kRatioComparisonSlack = 1e-12;

VariationReport make_report(double grad_min, double grad_max, RatioMethod method) {
  VariationReport r;
  r.method = method;
  r.grad_abs_min = grad_min;
  r.grad_abs_max = ExtendedReal(grad_max);
  r.normalization_c = grad_min > 0.0 ? ExtendedReal(1.0 / grad_min) : ExtendedReal::infinity();
  return r;
}

VariationReport bounded_report(double grad_min, double grad_max, double ratio) {
  auto r = make_report(grad_min, grad_max, RatioMethod::ClosedForm);
  r.variation_ratio = ExtendedReal(ratio);
  return r;
}

VariationReport unbounded_report(double grad_min, double grad_max) {
  auto r = make_report(grad_min, grad_max, RatioMethod::ClosedForm);
  r.variation_ratio = ExtendedReal::infinity();
  return r;
}

void require_label_only(const LossSpec& spec, const char* what) {
  require(spec.depends_on_label_only(), ErrorCode::UnsupportedFamily,
          std::string(what) + " is undefined for " + spec.describe() +
              " (the loss depends on all of u, not only u_y)");
}

double require_bounded_ratio(const LossSpec& spec) {
  const auto report = variation_ratio_closed(spec);
  require(report.bounded(), ErrorCode::UnboundedLoss, spec.describe() + " is variation-unbounded");
  return report.variation_ratio.value();
}

bool concave_on_unit_interval(const LossSpec& spec) {
  switch (spec.family()) {
    case LossFamily::MAE: return true;
    case LossFamily::CE:
    case LossFamily::EL:
    case LossFamily::VCE:
    case LossFamily::VEL: return false;
    default: break;
  }
  // SL / VSL: sign of l'' checked on a grid.
  constexpr int kSteps = 1000;
  for (int i = 1; i < kSteps; ++i) {
    if (profile_curvature(spec, static_cast<double>(i) / kSteps) > 0.0) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(RatioMethod method) noexcept {
  return method == RatioMethod::ClosedForm ? "closed_form" : "numeric_grid";
}

std::string_view to_string(BoundTheorem theorem) noexcept {
  return theorem == BoundTheorem::Symmetric ? "symmetric" : "general";
}

std::string_view to_string(Certificate certificate) noexcept {
  switch (certificate) {
    case Certificate::ByRatio: return "certified_by_ratio";
    case Certificate::ByConcavity: return "certified_by_concavity";
    case Certificate::NotCertified: return "not_certified";
  }
  return "unknown";
}

VariationReport variation_ratio_closed(const LossSpec& spec) {
  require_label_only(spec, "variation ratio");
  const double a = spec.a();
  switch (spec.family()) {
    case LossFamily::CE: return unbounded_report(1.0, kInf);
    case LossFamily::MAE: return bounded_report(2.0, 2.0, 1.0);
    case LossFamily::EL: return bounded_report(std::exp(-1.0), 1.0, std::numbers::e);
    case LossFamily::SL: return unbounded_report(0.0, 2.0 * kLn2);
    case LossFamily::VCE:
      if (a == 0.0) return unbounded_report(1.0, kInf);
      return bounded_report(1.0 / (1.0 + a), 1.0 / a, (1.0 + a) / a);
    case LossFamily::VEL: {
      const double log_a = std::log(a);
      return bounded_report(log_a / a, log_a, a);
    }
    case LossFamily::VSL: {
      if (a == 1.0) return unbounded_report(0.0, 2.0 * kLn2);
      const double gap = kLn2 - std::log1p(a);
      return bounded_report(2.0 * gap / (1.0 + a), 2.0 * kLn2, (a + 1.0) * kLn2 / gap);
    }
    default: break;
  }
  fail(ErrorCode::UnsupportedFamily, "variation ratio is undefined for " + spec.describe());
}

VariationReport variation_ratio_numeric(const LossSpec& spec, std::size_t grid_steps) {
  require_label_only(spec, "variation ratio");
  require(grid_steps >= 1000, ErrorCode::InvalidArgument, "numeric variation ratio needs grid_steps >= 1000");
  double lo = kInf;
  double hi = 0.0;
  const auto visit = [&](double u) {
    const double g = std::abs(profile_slope(spec, u));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  };
  visit(0.0);
  visit(1.0);
  const double span = 1.0 - 2.0 * kNumericGridMargin;
  for (std::size_t i = 0; i <= grid_steps; ++i) {
    visit(kNumericGridMargin + span * static_cast<double>(i) / static_cast<double>(grid_steps));
  }
  auto r = make_report(lo, hi, RatioMethod::NumericGrid);
  const bool unbounded = !(lo > 0.0) || !std::isfinite(hi) || hi / lo > kUnboundedRatioThreshold;
  r.variation_ratio = unbounded ? ExtendedReal::infinity() : ExtendedReal(hi / lo);
  return r;
}

double symmetric_defect(const LossSpec& spec, std::size_t num_classes, std::size_t n_pairs, std::uint64_t seed) {
  require_label_only(spec, "symmetric defect");
  require(num_classes >= 2, ErrorCode::InvalidArgument, "symmetric defect needs K >= 2");
  require(n_pairs >= 1, ErrorCode::InvalidArgument, "symmetric defect needs n_pairs >= 1");
  const auto report = variation_ratio_closed(spec);
  require(report.bounded(), ErrorCode::UnboundedLoss, spec.describe() + " is variation-unbounded");
  const double c = report.normalization_c.value();

  const std::uint64_t key = derive_seed(seed, purpose_tag("dirichlet-pairs"));
  std::vector<double> point(num_classes);
  const auto normalized_sum = [&](CounterRng& rng) {
    double total = 0.0;
    for (auto& x : point) {
      x = -std::log(rng.uniform_open_low());
      total += x;
    }
    double sum = 0.0;
    for (double x : point) sum += c * profile_value(spec, x / total);
    return sum;
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    CounterRng rng(key, p);
    const double su = normalized_sum(rng);
    const double sv = normalized_sum(rng);
    worst = std::max(worst, std::abs(su - sv));
  }
  return worst;
}

BoundReport excess_risk_bound_symmetric(const LossSpec& spec, std::size_t num_classes, double eta) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "bounds need K >= 2");
  const double k = static_cast<double>(num_classes);
  require(std::isfinite(eta) && eta >= 0.0 && (1.0 - eta) * k > 1.0, ErrorCode::Precondition,
          "symmetric bound requires 0 <= eta < 1 - 1/K");
  const double v = require_bounded_ratio(spec);
  BoundReport r;
  r.theorem = BoundTheorem::Symmetric;
  r.variation_ratio = v;
  r.c_const = eta / ((1.0 - eta) * k - 1.0);
  r.risk_gap_bound = r.c_const * (v - 1.0);
  return r;
}

namespace {

NoiseProfile profile_for(const NoiseModel& noise, std::size_t num_classes, const CorruptionRecord* realized) {
  if (noise.kind == NoiseKind::InstanceDependent) {
    require(realized != nullptr, ErrorCode::Precondition,
            "instance-dependent noise needs the realized corruption record");
    return realized_noise_profile(*realized);
  }
  return analytic_noise_profile(noise, num_classes);
}

}  // namespace

BoundReport excess_risk_bound_general(const LossSpec& spec, const NoiseModel& noise, std::size_t num_classes,
                                      const CorruptionRecord* realized) {
  const double v = require_bounded_ratio(spec);
  const auto profile = profile_for(noise, num_classes, realized);
  require(profile.clean_dominant(), ErrorCode::NotCleanDominant,
          "noise is not clean-label dominant (min margin " + std::to_string(profile.min_margin) + ")");
  BoundReport r;
  r.theorem = BoundTheorem::General;
  r.variation_ratio = v;
  r.c_const = profile.mean_clean_rate;
  r.a_const = profile.min_margin;
  r.risk_gap_bound = (1.0 + r.c_const / r.a_const) * (v - 1.0);
  return r;
}

ExtendedReal asymmetry_threshold(const NoiseModel& noise, std::size_t num_classes, const CorruptionRecord* realized) {
  const auto profile = profile_for(noise, num_classes, realized);
  require(profile.clean_dominant(), ErrorCode::NotCleanDominant,
          "noise is not clean-label dominant (min margin " + std::to_string(profile.min_margin) + ")");
  return profile.worst_ratio;
}

Certificate certify_asymmetric(const LossSpec& spec, std::span<const double> weights) {
  require_label_only(spec, "asymmetry certificate");
  require(weights.size() >= 2, ErrorCode::InvalidWeights, "need at least two weights");
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorCode::InvalidWeights, "weights must be finite and nonnegative");
  }
  const auto top = std::max_element(weights.begin(), weights.end());
  double runner_up = 0.0;
  for (auto it = weights.begin(); it != weights.end(); ++it) {
    if (it == top) continue;
    require(*it < *top, ErrorCode::InvalidWeights, "the maximum weight must be unique");
    runner_up = std::max(runner_up, *it);
  }
  if (concave_on_unit_interval(spec)) return Certificate::ByConcavity;
  const auto report = variation_ratio_closed(spec);
  if (!report.bounded()) return Certificate::NotCertified;
  if (runner_up == 0.0) return Certificate::ByRatio;
  const double v = report.variation_ratio.value();
  return v <= (*top / runner_up) * (1.0 + kRatioComparisonSlack) ? Certificate::ByRatio : Certificate::NotCertified;
}

LatticeArgmin argmin_weighted_risk_bruteforce(const LossSpec& spec, std::span<const double> weights,
                                              double resolution) {
  const std::size_t k = weights.size();
  require(k >= 2, ErrorCode::InvalidWeights, "need at least two weights");
  require(k <= 4, ErrorCode::ResourceLimit, "simplex grid search is limited to K <= 4, got K=" + std::to_string(k));
  require(std::isfinite(resolution) && resolution > 0.0 && resolution <= 0.02, ErrorCode::InvalidArgument,
          "grid resolution must lie in (0, 0.02]");
  const auto n = static_cast<int>(std::llround(1.0 / resolution));
  require(std::abs(n * resolution - 1.0) < 1e-9, ErrorCode::InvalidArgument, "grid resolution must divide 1");

  std::vector<int> counts(k, 0);
  std::vector<double> point(k);
  LatticeArgmin best;
  best.value = kInf;
  // Lexicographic enumeration of compositions of n into k parts; strict
  // improvement keeps the lexicographically smallest minimizer.
  const auto evaluate = [&] {
    for (std::size_t i = 0; i < k; ++i) point[i] = counts[i] / static_cast<double>(n);
    double value = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (weights[i] != 0.0) value += weights[i] * loss_value_unchecked(spec, point, i);
    }
    if (value < best.value) {
      best.value = value;
      best.point = point;
    }
  };
  const auto recurse = [&](auto&& self, std::size_t index, int remaining) -> void {
    if (index + 1 == k) {
      counts[index] = remaining;
      evaluate();
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, n);
  return best;
}

double empirical_risk(const LossSpec& spec, const Matrix& probs, std::span<const Label> labels) {
  require(probs.rows() > 0, ErrorCode::ContractViolation, "empirical risk of an empty dataset");
  require(static_cast<std::size_t>(probs.rows()) == labels.size(), ErrorCode::ContractViolation,
          "probability rows and label count differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const auto label = labels[static_cast<std::size_t>(i)];
    require(label >= 0 && label < probs.cols(), ErrorCode::ContractViolation, "label outside [0, K)");
    std::span<const double> row(probs.data() + i * probs.cols(), static_cast<std::size_t>(probs.cols()));
    total += loss_value_unchecked(spec, row, static_cast<std::size_t>(label));
  }
  return total / static_cast<double>(probs.rows());
}

double empirical_risk(const LossSpec& spec, const MlpModel& model, const LabeledDataset& dataset) {
  require(dataset.size() > 0, ErrorCode::ContractViolation, "empirical risk of an empty dataset");
  require(dataset.num_classes == model.num_classes(), ErrorCode::ContractViolation,
          "model outputs " + std::to_string(model.num_classes()) + " classes, dataset has " +
              std::to_string(dataset.num_classes));
  return empirical_risk(spec, forward(model, dataset.features).probs, dataset.labels);
}

}  // namespace vblab

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
#include <span>
#include <string_view>
#include <vector>

#include "vblab/common.hpp"
#include "vblab/data.hpp"
#include "vblab/losses.hpp"
#include "vblab/nn.hpp"
#include "vblab/noise.hpp"

namespace vblab {

enum class RatioMethod { ClosedForm, NumericGrid };

std::string_view to_string(RatioMethod method) noexcept;

/// Extrema of |l'(u)| over u in (0, 1) and the ratio sup / inf.
struct VariationReport {
  double grad_abs_min = 0.0;
  ExtendedReal grad_abs_max;
  ExtendedReal variation_ratio;
  /// 1 / grad_abs_min; infinite when the infimum is 0 (SL).
  ExtendedReal normalization_c;
  RatioMethod method = RatioMethod::ClosedForm;

  bool bounded() const noexcept { return variation_ratio.is_finite(); }
};

/// Closed forms:
///   CE inf, MAE 1, EL e, VCE (1+a)/a (inf at a=0), VEL a,
///   VSL (a+1) ln2 / (ln2 - ln(a+1)) (inf at a=1; SL likewise).
VariationReport variation_ratio_closed(const LossSpec& spec);

/// Numeric estimate from |l'| on a uniform grid over [1e-6, 1 - 1e-6] plus
/// the endpoint limits u -> 0 and u -> 1. Ratios above 1e9 are reported as
/// infinite.
inline constexpr double kNumericGridMargin = 1e-6;
inline constexpr double kUnboundedRatioThreshold = 1e9;
VariationReport variation_ratio_numeric(const LossSpec& spec, std::size_t grid_steps);

/// Largest observed |sum_k c l(u_k) - sum_k c l(v_k)| over n_pairs of
/// Dirichlet(1, ..., 1) points, with c = 1 / min |l'|. Bounded by v(L) - 1.
double symmetric_defect(const LossSpec& spec, std::size_t num_classes, std::size_t n_pairs, std::uint64_t seed);

enum class BoundTheorem { Symmetric, General };

std::string_view to_string(BoundTheorem theorem) noexcept;

/// Excess clean-risk bound for the noisy-risk minimizer.
///   Symmetric: c = eta / ((1 - eta) K - 1), bound = c (v - 1)
///   General:   c = E[1 - eta_x], a = min_{x, k != y} (1 - eta_x - eta_{x,k}),
///              bound = (1 + c / a)(v - 1)
struct BoundReport {
  BoundTheorem theorem = BoundTheorem::Symmetric;
  double risk_gap_bound = 0.0;
  double c_const = 0.0;
  double a_const = 0.0;  // General only
  double variation_ratio = 1.0;
};

BoundReport excess_risk_bound_symmetric(const LossSpec& spec, std::size_t num_classes, double eta);
/// Instance-dependent noise needs `realized` (the record produced by the
/// corruption); the expectation and minimum are taken over its instances.
/// The hypothesis that R_L(f*) is minimal is not checked.
BoundReport excess_risk_bound_general(const LossSpec& spec, const NoiseModel& noise, std::size_t num_classes,
                                      const CorruptionRecord* realized = nullptr);

/// min_x (1 - eta_x) / max_{k != y} eta_{x,k}; any loss with v(L) at or below
/// this value is asymmetric under the noise. Infinite for noise-free models.
ExtendedReal asymmetry_threshold(const NoiseModel& noise, std::size_t num_classes,
                                 const CorruptionRecord* realized = nullptr);

enum class Certificate { ByRatio, ByConcavity, NotCertified };

std::string_view to_string(Certificate certificate) noexcept;

/// Sufficient conditions for argmin_u sum_k w_k l(u_k) = e_t, t = argmax w:
/// l'' <= 0 on (0, 1) (checked first), or v(L) <= w_t / w_i for all i != t.
/// NotCertified does not prove the loss is not asymmetric.
Certificate certify_asymmetric(const LossSpec& spec, std::span<const double> weights);

struct LatticeArgmin {
  std::vector<double> point;
  double value = 0.0;
};

/// Exhaustive search of sum_k w_k l(u_k) over the simplex lattice with
/// spacing `resolution` (K <= 4, resolution <= 0.02). Ties resolve to the
/// lexicographically smallest point.
LatticeArgmin argmin_weighted_risk_bruteforce(const LossSpec& spec, std::span<const double> weights,
                                              double resolution);

/// Mean loss over the dataset under the model's predictions.
double empirical_risk(const LossSpec& spec, const MlpModel& model, const LabeledDataset& dataset);
/// Mean loss over rows of a probability matrix.
double empirical_risk(const LossSpec& spec, const Matrix& probs, std::span<const Label> labels);

}  // namespace vblab

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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vblab/common.hpp"

namespace vblab {

enum class LossFamily { CE, MAE, EL, SL, VCE, VEL, VSL, NCE, Combined };

std::string_view to_string(LossFamily family) noexcept;
/// Case-insensitive; accepts "nce+vbl" as an alias of "combined".
LossFamily parse_loss_family(std::string_view name);

/// Per-sample loss description. Hyperparameter ranges are enforced at
/// construction, so every LossSpec in circulation is valid:
///   VCE: a >= 0, VEL: a > 1, VSL: 0 < a <= 1.
/// Combined is alpha * NCE + beta * {VCE, VEL, VSL}.
class LossSpec {
 public:
  static LossSpec ce() { return LossSpec(LossFamily::CE, 0.0); }
  static LossSpec mae() { return LossSpec(LossFamily::MAE, 0.0); }
  static LossSpec el() { return LossSpec(LossFamily::EL, 0.0); }
  static LossSpec sl() { return LossSpec(LossFamily::SL, 0.0); }
  static LossSpec nce() { return LossSpec(LossFamily::NCE, 0.0); }
  static LossSpec vce(double a);
  static LossSpec vel(double a);
  static LossSpec vsl(double a);
  /// Single (non-Combined) family; `a` is ignored where unused.
  static LossSpec single(LossFamily family, double a = 0.0);
  static LossSpec combined(double alpha, double beta, const LossSpec& active, const LossSpec& passive);
  static LossSpec combined(double alpha, double beta, const LossSpec& passive) {
    return combined(alpha, beta, nce(), passive);
  }

  LossFamily family() const noexcept { return family_; }
  double a() const noexcept { return a_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  LossSpec active() const;
  LossSpec passive() const;

  /// True when the loss is a function of u_label only (not NCE, not Combined).
  bool depends_on_label_only() const noexcept {
    return family_ != LossFamily::NCE && family_ != LossFamily::Combined;
  }

  /// e.g. "vce(a=4)" or "combined(alpha=1,beta=10,nce,vce(a=4))".
  std::string describe() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;

 private:
  LossSpec(LossFamily family, double a) : family_(family), a_(a) {}

  LossFamily family_;
  double a_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  LossFamily passive_family_ = LossFamily::CE;  // meaningful for Combined only
};

/// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before any
/// logarithm of u is taken (CE, VCE, NCE).
inline constexpr double kProbEpsilon = 1e-7;
inline constexpr double kSimplexTolerance = 1e-9;

/// A validated point on the probability simplex, K >= 2.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);
  ProbabilityVector(std::initializer_list<double> probs)
      : ProbabilityVector(std::vector<double>(probs)) {}

  std::span<const double> values() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }

  /// Throws ContractViolation unless `probs` is a simplex point with K >= 2.
  static void check(std::span<const double> probs);

 private:
  std::vector<double> probs_;
};

double loss_value(const LossSpec& spec, const ProbabilityVector& probs, std::size_t label);
/// dL/du (with respect to the softmax output, not the logits).
std::vector<double> loss_grad(const LossSpec& spec, const ProbabilityVector& probs, std::size_t label);

// Unchecked variants for hot loops; callers guarantee a simplex point and a
// valid label. `grad_out` is overwritten.
double loss_value_unchecked(const LossSpec& spec, std::span<const double> probs, std::size_t label) noexcept;
void loss_grad_unchecked(const LossSpec& spec, std::span<const double> probs, std::size_t label,
                         std::span<double> grad_out) noexcept;

// Scalar profile l(u) of a single-argument family (depends_on_label_only()).
double profile_value(const LossSpec& spec, double u);
/// Exact l'(u) without clamping; -inf for CE at u = 0.
double profile_slope(const LossSpec& spec, double u);
/// Exact l''(u) without clamping.
double profile_curvature(const LossSpec& spec, double u);

struct CurvePoint {
  double u;
  double grad_abs;
};

/// |l'(u)| on a uniform grid over [eps, 1 - eps].
std::vector<CurvePoint> grad_magnitude_curve(const LossSpec& spec, std::size_t n_points);
/// CSV with header "u,grad_abs".
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace vblab

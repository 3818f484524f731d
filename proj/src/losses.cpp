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

#include "vblab/losses.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

namespace vblab {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double clamp_prob(double u) noexcept { return std::clamp(u, kProbEpsilon, 1.0 - kProbEpsilon); }

std::string fmt_number(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

// l(u) for single-argument families; u already in [0, 1].
double single_value(LossFamily family, double a, double u) noexcept {
  switch (family) {
    case LossFamily::CE: return -std::log(clamp_prob(u));
    case LossFamily::MAE: return 2.0 * (1.0 - u);
    case LossFamily::EL: return std::exp(-u);
    case LossFamily::SL: {
      const double g = std::log1p(u) - kLn2;
      return g * g;
    }
    case LossFamily::VCE: return -std::log(clamp_prob(u) + a);
    case LossFamily::VEL: return std::exp(-u * std::log(a));
    case LossFamily::VSL: {
      const double g = std::log1p(a * u) - kLn2;
      return g * g / a;
    }
    case LossFamily::NCE:
    case LossFamily::Combined: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double single_slope(LossFamily family, double a, double u) noexcept {
  switch (family) {
    case LossFamily::CE: return -1.0 / u;
    case LossFamily::MAE: return -2.0;
    case LossFamily::EL: return -std::exp(-u);
    case LossFamily::SL: return 2.0 * (std::log1p(u) - kLn2) / (u + 1.0);
    case LossFamily::VCE: return -1.0 / (u + a);
    case LossFamily::VEL: {
      const double log_a = std::log(a);
      return -std::exp(-u * log_a) * log_a;
    }
    case LossFamily::VSL: return 2.0 * (std::log1p(a * u) - kLn2) / (a * u + 1.0);
    case LossFamily::NCE:
    case LossFamily::Combined: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double single_curvature(LossFamily family, double a, double u) noexcept {
  switch (family) {
    case LossFamily::CE: return 1.0 / (u * u);
    case LossFamily::MAE: return 0.0;
    case LossFamily::EL: return std::exp(-u);
    case LossFamily::SL: a = 1.0; [[fallthrough]];
    case LossFamily::VSL: {
      const double s = a * u + 1.0;
      return 2.0 * a * (1.0 - (std::log1p(a * u) - kLn2)) / (s * s);
    }
    case LossFamily::VCE: return 1.0 / ((u + a) * (u + a));
    case LossFamily::VEL: {
      const double log_a = std::log(a);
      return std::exp(-u * log_a) * log_a * log_a;
    }
    case LossFamily::NCE:
    case LossFamily::Combined: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Families whose value takes log(u) are evaluated at the clamped point.
bool clamps_probability(LossFamily family) noexcept {
  return family == LossFamily::CE || family == LossFamily::VCE || family == LossFamily::NCE;
}

double nce_value(std::span<const double> probs, std::size_t label) noexcept {
  double denominator = 0.0;
  for (double u : probs) denominator -= std::log(clamp_prob(u));
  return -std::log(clamp_prob(probs[label])) / denominator;
}

// Quotient rule on A / B with A = -log u_y and B = -sum_k log u_k.
void nce_grad_accumulate(std::span<const double> probs, std::size_t label, double weight,
                         std::span<double> grad) noexcept {
  double denominator = 0.0;
  for (double u : probs) denominator -= std::log(clamp_prob(u));
  const double numerator = -std::log(clamp_prob(probs[label]));
  const double inv_b2 = 1.0 / (denominator * denominator);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double u = clamp_prob(probs[k]);
    double d = numerator / u;  // -A * dB/du_k
    if (k == label) d -= denominator / u;
    grad[k] += weight * d * inv_b2;
  }
}

void require_single(const LossSpec& spec, const char* what) {
  require(spec.depends_on_label_only(), ErrorCode::UnsupportedFamily,
          std::string(what) + " is defined for single-argument losses only, got " + spec.describe());
}

}  // namespace

std::string_view to_string(LossFamily family) noexcept {
  switch (family) {
    case LossFamily::CE: return "ce";
    case LossFamily::MAE: return "mae";
    case LossFamily::EL: return "el";
    case LossFamily::SL: return "sl";
    case LossFamily::VCE: return "vce";
    case LossFamily::VEL: return "vel";
    case LossFamily::VSL: return "vsl";
    case LossFamily::NCE: return "nce";
    case LossFamily::Combined: return "combined";
  }
  return "unknown";
}

LossFamily parse_loss_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto family : {LossFamily::CE, LossFamily::MAE, LossFamily::EL, LossFamily::SL, LossFamily::VCE,
                      LossFamily::VEL, LossFamily::VSL, LossFamily::NCE, LossFamily::Combined}) {
    if (lower == to_string(family)) return family;
  }
  if (lower == "nce+vbl") return LossFamily::Combined;
  fail(ErrorCode::InvalidArgument, "unknown loss family '" + std::string(name) + "'");
}

LossSpec LossSpec::vce(double a) {
  require(std::isfinite(a) && a >= 0.0, ErrorCode::InvalidArgument, "VCE requires a >= 0, got a=" + fmt_number(a));
  return LossSpec(LossFamily::VCE, a);
}

LossSpec LossSpec::vel(double a) {
  require(std::isfinite(a) && a > 1.0, ErrorCode::InvalidArgument, "VEL requires a > 1, got a=" + fmt_number(a));
  return LossSpec(LossFamily::VEL, a);
}

LossSpec LossSpec::vsl(double a) {
  require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorCode::InvalidArgument,
          "VSL requires 0 < a <= 1, got a=" + fmt_number(a));
  return LossSpec(LossFamily::VSL, a);
}

LossSpec LossSpec::single(LossFamily family, double a) {
  switch (family) {
    case LossFamily::CE: return ce();
    case LossFamily::MAE: return mae();
    case LossFamily::EL: return el();
    case LossFamily::SL: return sl();
    case LossFamily::NCE: return nce();
    case LossFamily::VCE: return vce(a);
    case LossFamily::VEL: return vel(a);
    case LossFamily::VSL: return vsl(a);
    case LossFamily::Combined: break;
  }
  fail(ErrorCode::InvalidArgument, "combined loss needs alpha, beta and a passive loss");
}

LossSpec LossSpec::combined(double alpha, double beta, const LossSpec& active, const LossSpec& passive) {
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::InvalidArgument,
          "combined loss requires alpha >= 0, got " + fmt_number(alpha));
  require(std::isfinite(beta) && beta >= 0.0, ErrorCode::InvalidArgument,
          "combined loss requires beta >= 0, got " + fmt_number(beta));
  require(active.family() == LossFamily::NCE, ErrorCode::InvalidArgument,
          "combined loss: active term must be nce, got " + active.describe());
  const auto pf = passive.family();
  require(pf == LossFamily::VCE || pf == LossFamily::VEL || pf == LossFamily::VSL, ErrorCode::InvalidArgument,
          "combined loss: passive term must be vce, vel or vsl, got " + passive.describe());
  LossSpec spec(LossFamily::Combined, passive.a());
  spec.alpha_ = alpha;
  spec.beta_ = beta;
  spec.passive_family_ = pf;
  return spec;
}

LossSpec LossSpec::active() const {
  require(family_ == LossFamily::Combined, ErrorCode::InvalidArgument, "active() on a non-combined loss");
  return nce();
}

LossSpec LossSpec::passive() const {
  require(family_ == LossFamily::Combined, ErrorCode::InvalidArgument, "passive() on a non-combined loss");
  return LossSpec(passive_family_, a_);
}

std::string LossSpec::describe() const {
  switch (family_) {
    case LossFamily::VCE:
    case LossFamily::VEL:
    case LossFamily::VSL: return std::string(to_string(family_)) + "(a=" + fmt_number(a_) + ")";
    case LossFamily::Combined:
      return "combined(alpha=" + fmt_number(alpha_) + ",beta=" + fmt_number(beta_) + ",nce," +
             passive().describe() + ")";
    default: return std::string(to_string(family_));
  }
}

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) { check(probs_); }

void ProbabilityVector::check(std::span<const double> probs) {
  require(probs.size() >= 2, ErrorCode::ContractViolation, "probability vector needs K >= 2 components");
  double sum = 0.0;
  for (double u : probs) {
    require(std::isfinite(u) && u >= 0.0 && u <= 1.0, ErrorCode::ContractViolation,
            "probability component outside [0, 1]: " + fmt_number(u));
    sum += u;
  }
  require(std::abs(sum - 1.0) <= kSimplexTolerance, ErrorCode::ContractViolation,
          "probabilities sum to " + fmt_number(sum) + ", not 1");
}

double loss_value_unchecked(const LossSpec& spec, std::span<const double> probs, std::size_t label) noexcept {
  switch (spec.family()) {
    case LossFamily::NCE: return nce_value(probs, label);
    case LossFamily::Combined: {
      const double passive = single_value(spec.passive().family(), spec.a(), probs[label]);
      return spec.alpha() * nce_value(probs, label) + spec.beta() * passive;
    }
    default: return single_value(spec.family(), spec.a(), probs[label]);
  }
}

void loss_grad_unchecked(const LossSpec& spec, std::span<const double> probs, std::size_t label,
                         std::span<double> grad_out) noexcept {
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  const auto slope_at = [&](LossFamily family) {
    const double u = clamps_probability(family) ? clamp_prob(probs[label]) : probs[label];
    return single_slope(family, spec.a(), u);
  };
  switch (spec.family()) {
    case LossFamily::NCE: nce_grad_accumulate(probs, label, 1.0, grad_out); break;
    case LossFamily::Combined: {
      nce_grad_accumulate(probs, label, spec.alpha(), grad_out);
      grad_out[label] += spec.beta() * slope_at(spec.passive().family());
      break;
    }
    default: grad_out[label] = slope_at(spec.family()); break;
  }
}

namespace {

void check_inputs(std::span<const double> probs, std::size_t label) {
  ProbabilityVector::check(probs);
  require(label < probs.size(), ErrorCode::ContractViolation,
          "label " + std::to_string(label) + " out of range for K=" + std::to_string(probs.size()));
}

}  // namespace

double loss_value(const LossSpec& spec, const ProbabilityVector& probs, std::size_t label) {
  check_inputs(probs.values(), label);
  return loss_value_unchecked(spec, probs.values(), label);
}

std::vector<double> loss_grad(const LossSpec& spec, const ProbabilityVector& probs, std::size_t label) {
  check_inputs(probs.values(), label);
  std::vector<double> grad(probs.size());
  loss_grad_unchecked(spec, probs.values(), label, grad);
  return grad;
}

double profile_value(const LossSpec& spec, double u) {
  require_single(spec, "profile_value");
  return single_value(spec.family(), spec.a(), u);
}

double profile_slope(const LossSpec& spec, double u) {
  require_single(spec, "profile_slope");
  return single_slope(spec.family(), spec.a(), u);
}

double profile_curvature(const LossSpec& spec, double u) {
  require_single(spec, "profile_curvature");
  return single_curvature(spec.family(), spec.a(), u);
}

std::vector<CurvePoint> grad_magnitude_curve(const LossSpec& spec, std::size_t n_points) {
  require_single(spec, "grad_magnitude_curve");
  require(n_points >= 2, ErrorCode::InvalidArgument, "grad_magnitude_curve needs n_points >= 2");
  std::vector<CurvePoint> curve;
  curve.reserve(n_points);
  const double lo = kProbEpsilon;
  const double step = (1.0 - 2.0 * kProbEpsilon) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double u = (i + 1 == n_points) ? 1.0 - kProbEpsilon : lo + step * static_cast<double>(i);
    curve.push_back({u, std::abs(single_slope(spec.family(), spec.a(), u))});
  }
  return curve;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "u,grad_abs\n";
  for (const auto& p : curve) out << fmt_number(p.u) << ',' << fmt_number(p.grad_abs) << '\n';
}

}  // namespace vblab

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

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace vblab {

using Label = std::int32_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

// Error categories. Each maps one-to-one onto a status code of the C API.
enum class ErrorCode {
  InvalidArgument = 1,   // parameter / construction errors
  ContractViolation,     // malformed inputs (non-simplex probs, shape mismatch)
  UnsupportedFamily,
  UnboundedLoss,
  Precondition,
  NotCleanDominant,
  InvalidWeights,
  ResourceLimit,
  Format,
  Consistency,
  Io,
  DegenerateClass,
  Stratification,
  Divergence,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

/// A nonnegative quantity that may be +infinity. Infinity is an explicit
/// state rather than an IEEE value so reports never leak inf/nan floats.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  // Non-finite doubles are mapped to the infinite state.
  ExtendedReal(double value)  // NOLINT(google-explicit-constructor)
      : infinite_(!std::isfinite(value)), value_(std::isfinite(value) ? value : 0.0) {}

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }

  /// Finite value; throws Precondition when infinite.
  double value() const {
    if (infinite_) fail(ErrorCode::Precondition, "extended real is infinite");
    return value_;
  }

  /// IEEE view for arithmetic and comparisons (+inf when infinite).
  double as_double() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  /// "inf" or the shortest round-trip decimal form.
  std::string str() const;

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && a.value_ == b.value_;
  }

 private:
  bool infinite_ = false;
  double value_ = 0.0;
};

}  // namespace vblab

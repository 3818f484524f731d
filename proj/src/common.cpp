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

#include <charconv>

#include "vblab/common.hpp"

namespace vblab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ContractViolation: return "contract_violation";
    case ErrorCode::UnsupportedFamily: return "unsupported_family";
    case ErrorCode::UnboundedLoss: return "unbounded_loss";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::NotCleanDominant: return "not_clean_dominant";
    case ErrorCode::InvalidWeights: return "invalid_weights";
    case ErrorCode::ResourceLimit: return "resource_limit";
    case ErrorCode::Format: return "format";
    case ErrorCode::Consistency: return "consistency";
    case ErrorCode::Io: return "io";
    case ErrorCode::DegenerateClass: return "degenerate_class";
    case ErrorCode::Stratification: return "stratification";
    case ErrorCode::Divergence: return "divergence";
  }
  return "unknown";
}

std::string ExtendedReal::str() const {
  if (infinite_) return "inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value_);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

}  // namespace vblab

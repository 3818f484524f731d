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

#include <string>
#include <string_view>

#include "vblab/trainer.hpp"

namespace vblab {

/// Output locations named in a run configuration file. Empty = not written.
struct OutputPaths {
  std::string metrics;
  std::string summary;
  std::string reliability;
  std::string checkpoint;
  std::string resolved_config;
};

/// A versioned JSON run description ("version": 1). Unknown keys are
/// rejected at every level.
struct RunConfig {
  ExperimentConfig experiment;
  OutputPaths outputs;
};

inline constexpr int kConfigVersion = 1;

/// Throws InvalidArgument on malformed documents.
RunConfig parse_run_config(std::string_view json_text);
/// Fully-resolved document with every default filled in.
std::string dump_run_config(const RunConfig& config);
/// Summary document: resolved config echo, best/last/gap, wall-clock seconds.
std::string summary_json(const RunConfig& config, const ExperimentResult& result);

}  // namespace vblab

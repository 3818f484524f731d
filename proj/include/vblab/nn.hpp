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
#include <filesystem>
#include <string_view>
#include <vector>

#include "vblab/common.hpp"

namespace vblab {

/// Dense layer: out = in * weights + bias; weights are fan_in x fan_out.
struct DenseLayer {
  Matrix weights;
  RowVector bias;
};

/// Feed-forward classifier: ReLU hidden layers, linear logits, softmax output.
class MlpModel {
 public:
  /// layer_dims = (d, h_1, ..., h_m, K). Weights ~ N(0, 2 / fan_in), biases 0.
  MlpModel(std::vector<std::size_t> layer_dims, std::uint64_t seed);
  /// Parameters supplied directly (checkpoints, tests).
  explicit MlpModel(std::vector<DenseLayer> layers);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t num_classes() const noexcept { return dims_.back(); }
  std::size_t parameter_count() const noexcept;
  bool all_finite() const noexcept;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

struct ForwardResult {
  Matrix logits;
  Matrix probs;
};

ForwardResult forward(const MlpModel& model, const Matrix& batch);

/// Everything backward() needs from a forward pass.
struct ForwardTrace {
  std::vector<Matrix> activations;  // input, then each post-ReLU hidden output
  Matrix logits;
  Matrix probs;
};

ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch);

/// Same shapes as the model's layers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> biases;

  bool all_finite() const noexcept;
};

/// Gradients of the mean over the batch of per-sample losses, given
/// dL_i/du_i in row i of dL_dprobs. The softmax Jacobian diag(u) - u u^T is
/// applied here.
Gradients backward(const MlpModel& model, const Matrix& batch, const Matrix& dL_dprobs);
Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& dL_dprobs);

enum class Schedule { Constant, Cosine };

std::string_view to_string(Schedule schedule) noexcept;
Schedule parse_schedule(std::string_view name);

struct OptimizerConfig {
  double lr0 = 0.01;
  double momentum = 0.9;
  double l1_decay = 0.0;
  Schedule schedule = Schedule::Cosine;
  std::size_t total_epochs = 1;

  void validate() const;
  /// Per-epoch learning rate; cosine: lr0 * (1 + cos(pi * epoch / total)) / 2.
  double learning_rate(std::size_t epoch) const;
};

/// SGD with momentum and L1 decay folded into the velocity:
///   v <- momentum * v + g + l1_decay * sign(p);  p <- p - lr_epoch * v
class OptimizerState {
 public:
  OptimizerState(OptimizerConfig config, const MlpModel& model);

  const OptimizerConfig& config() const noexcept { return config_; }
  const Gradients& velocity() const noexcept { return velocity_; }

  /// Throws Divergence on non-finite gradients (model left untouched) and
  /// Precondition when epoch >= total_epochs.
  void step(MlpModel& model, const Gradients& grads, std::size_t epoch);

 private:
  OptimizerConfig config_;
  Gradients velocity_;
};

inline void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt, std::size_t epoch) {
  opt.step(model, grads, epoch);
}

/// JSON checkpoint: {"magic": "VBLAB-MLP-1", "layer_dims": [...],
/// "layers": [{"weights": [row-major], "bias": [...]}, ...]}.
inline constexpr std::string_view kCheckpointMagic = "VBLAB-MLP-1";
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace vblab

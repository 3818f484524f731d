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

#include "vblab/nn.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "vblab/rng.hpp"

namespace vblab {

namespace {

Gradients zeros_like(const MlpModel& model) {
  Gradients g;
  for (const auto& layer : model.layers()) {
    g.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    g.biases.push_back(RowVector::Zero(layer.bias.size()));
  }
  return g;
}

void check_batch(const MlpModel& model, const Matrix& batch) {
  require(static_cast<std::size_t>(batch.cols()) == model.input_dim(), ErrorCode::ContractViolation,
          "batch width " + std::to_string(batch.cols()) + " does not match model input " +
              std::to_string(model.input_dim()));
}

template <typename Derived>
void apply_update(Eigen::MatrixBase<Derived>& param, Eigen::MatrixBase<Derived>& velocity, const Derived& grad,
                  double momentum, double l1_decay, double lr) {
  velocity = momentum * velocity + grad;
  if (l1_decay != 0.0) velocity += l1_decay * param.array().sign().matrix();
  param -= lr * velocity;
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> layer_dims, std::uint64_t seed) : dims_(std::move(layer_dims)) {
  require(dims_.size() >= 2, ErrorCode::InvalidArgument, "an MLP needs at least input and output dimensions");
  for (auto d : dims_) require(d > 0, ErrorCode::InvalidArgument, "layer dimensions must be positive");
  require(dims_.back() >= 2, ErrorCode::InvalidArgument, "a classifier needs K >= 2 outputs");
  const std::uint64_t key = derive_seed(seed, purpose_tag("mlp-init"));
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(dims_[l]);
    const auto fan_out = static_cast<Eigen::Index>(dims_[l + 1]);
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    CounterRng rng(key, l);
    DenseLayer layer{Matrix(fan_in, fan_out), RowVector::Zero(fan_out)};
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weights(i, j) = stddev * rng.normal();
    }
    layers_.push_back(std::move(layer));
  }
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), ErrorCode::InvalidArgument, "an MLP needs at least one layer");
  dims_.push_back(static_cast<std::size_t>(layers_.front().weights.rows()));
  for (const auto& layer : layers_) {
    require(static_cast<std::size_t>(layer.weights.rows()) == dims_.back(), ErrorCode::ContractViolation,
            "consecutive layer dimensions do not match");
    require(layer.bias.size() == layer.weights.cols(), ErrorCode::ContractViolation, "bias size mismatch");
    dims_.push_back(static_cast<std::size_t>(layer.weights.cols()));
  }
  require(dims_.back() >= 2, ErrorCode::InvalidArgument, "a classifier needs K >= 2 outputs");
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return n;
}

bool MlpModel::all_finite() const noexcept {
  for (const auto& layer : layers_) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

bool Gradients::all_finite() const noexcept {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  probs.array().colwise() /= probs.rowwise().sum().array();
  return probs;
}

ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch) {
  check_batch(model, batch);
  ForwardTrace trace;
  const auto& layers = model.layers();
  trace.activations.reserve(layers.size());
  trace.activations.push_back(batch);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix z = trace.activations.back() * layers[l].weights;
    z.rowwise() += layers[l].bias;
    trace.activations.push_back(z.cwiseMax(0.0));
  }
  trace.logits = trace.activations.back() * layers.back().weights;
  trace.logits.rowwise() += layers.back().bias;
  trace.probs = softmax_rows(trace.logits);
  return trace;
}

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  auto trace = forward_trace(model, batch);
  return {std::move(trace.logits), std::move(trace.probs)};
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& dL_dprobs) {
  require(dL_dprobs.rows() == trace.probs.rows() && dL_dprobs.cols() == trace.probs.cols(),
          ErrorCode::ContractViolation, "dL/dprobs shape does not match the forward output");
  const auto& layers = model.layers();
  Gradients grads = zeros_like(model);
  const double inv_batch = 1.0 / static_cast<double>(trace.probs.rows());

  // dL/dz = u * (g - <u, g>) row-wise.
  const Eigen::VectorXd inner = (trace.probs.array() * dL_dprobs.array()).rowwise().sum();
  Matrix delta = (trace.probs.array() * (dL_dprobs.colwise() - inner).array()).matrix() * inv_batch;

  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix& input = trace.activations[l];
    grads.weights[l].noalias() = input.transpose() * delta;
    grads.biases[l] = delta.colwise().sum();
    if (l == 0) break;
    Matrix upstream = delta * layers[l].weights.transpose();
    delta = (upstream.array() * (input.array() > 0.0).cast<double>()).matrix();
  }
  return grads;
}

Gradients backward(const MlpModel& model, const Matrix& batch, const Matrix& dL_dprobs) {
  return backward(model, forward_trace(model, batch), dL_dprobs);
}

std::string_view to_string(Schedule schedule) noexcept {
  return schedule == Schedule::Cosine ? "cosine" : "constant";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "cosine") return Schedule::Cosine;
  if (name == "constant") return Schedule::Constant;
  fail(ErrorCode::InvalidArgument, "unknown schedule '" + std::string(name) + "' (expected cosine|constant)");
}

void OptimizerConfig::validate() const {
  require(std::isfinite(lr0) && lr0 >= 0.0, ErrorCode::InvalidArgument, "learning rate must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
  require(std::isfinite(l1_decay) && l1_decay >= 0.0, ErrorCode::InvalidArgument, "l1_decay must be >= 0");
  require(total_epochs >= 1, ErrorCode::InvalidArgument, "total_epochs must be >= 1");
}

double OptimizerConfig::learning_rate(std::size_t epoch) const {
  if (schedule == Schedule::Constant) return lr0;
  const double progress = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimizerState::OptimizerState(OptimizerConfig config, const MlpModel& model)
    : config_(config), velocity_(zeros_like(model)) {
  config_.validate();
}

void OptimizerState::step(MlpModel& model, const Gradients& grads, std::size_t epoch) {
  require(epoch < config_.total_epochs, ErrorCode::Precondition,
          "epoch " + std::to_string(epoch) + " >= total_epochs " + std::to_string(config_.total_epochs));
  require(grads.weights.size() == velocity_.weights.size(), ErrorCode::ContractViolation,
          "gradient layer count does not match the model");
  require(grads.all_finite(), ErrorCode::Divergence, "non-finite gradient at epoch " + std::to_string(epoch));
  const double lr = config_.learning_rate(epoch);
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    apply_update(layers[l].weights, velocity_.weights[l], grads.weights[l], config_.momentum, config_.l1_decay, lr);
    apply_update(layers[l].bias, velocity_.biases[l], grads.biases[l], config_.momentum, config_.l1_decay, lr);
  }
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["magic"] = kCheckpointMagic;
  doc["layer_dims"] = model.layer_dims();
  doc["layers"] = nlohmann::json::array();
  for (const auto& layer : model.layers()) {
    std::vector<double> w(layer.weights.data(), layer.weights.data() + layer.weights.size());
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    doc["layers"].push_back({{"weights", w}, {"bias", b}});
  }
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << doc.dump() << '\n';
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "'" + path.string() + "': " + e.what());
  }
  require(doc.value("magic", std::string()) == kCheckpointMagic, ErrorCode::Format,
          "'" + path.string() + "' is not a VBLAB-MLP-1 checkpoint");
  try {
    const auto dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    const auto& layers_json = doc.at("layers");
    require(dims.size() == layers_json.size() + 1, ErrorCode::Format, "layer count does not match layer_dims");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l < layers_json.size(); ++l) {
      const auto w = layers_json[l].at("weights").get<std::vector<double>>();
      const auto b = layers_json[l].at("bias").get<std::vector<double>>();
      const auto rows = static_cast<Eigen::Index>(dims[l]);
      const auto cols = static_cast<Eigen::Index>(dims[l + 1]);
      require(w.size() == dims[l] * dims[l + 1] && b.size() == dims[l + 1], ErrorCode::Format,
              "parameter array size does not match layer_dims");
      layers.push_back({Eigen::Map<const Matrix>(w.data(), rows, cols),
                        Eigen::Map<const RowVector>(b.data(), cols)});
    }
    return MlpModel(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "'" + path.string() + "': " + e.what());
  }
}

}  // namespace vblab

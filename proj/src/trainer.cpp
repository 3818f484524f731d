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

#include "vblab/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "vblab/rng.hpp"

namespace vblab {

namespace {

std::string num(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

void check_prediction_inputs(const Matrix& probs, std::span<const Label> labels) {
  require(probs.rows() > 0, ErrorCode::ContractViolation, "no predictions to score");
  require(static_cast<std::size_t>(probs.rows()) == labels.size(), ErrorCode::ContractViolation,
          "prediction rows and label count differ");
}

// argmax with ties broken toward the lowest index.
Eigen::Index predicted_class(const Matrix& probs, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < probs.cols(); ++k) {
    if (probs(row, k) > probs(row, best)) best = k;
  }
  return best;
}

// Bin b covers (b / n, (b + 1) / n]; confidence 0 falls into bin 0.
std::size_t bin_index(double confidence, std::size_t n_bins) {
  const double n = static_cast<double>(n_bins);
  auto idx = static_cast<long long>(std::ceil(confidence * n)) - 1;
  idx = std::clamp<long long>(idx, 0, static_cast<long long>(n_bins) - 1);
  if (idx > 0 && confidence <= static_cast<double>(idx) / n) --idx;
  if (idx + 1 < static_cast<long long>(n_bins) && confidence > static_cast<double>(idx + 1) / n) ++idx;
  return static_cast<std::size_t>(idx);
}

Matrix gather_rows(const Matrix& features, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

}  // namespace

std::string_view to_string(DatasetConfig::Source source) noexcept {
  switch (source) {
    case DatasetConfig::Source::Blobs: return "blobs";
    case DatasetConfig::Source::Idx: return "idx";
    case DatasetConfig::Source::Csv: return "csv";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  require(epochs >= 1, ErrorCode::InvalidArgument, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");
  require(eval_every >= 1, ErrorCode::InvalidArgument, "eval_every must be >= 1");
  require(ece_bins >= 1, ErrorCode::InvalidArgument, "ece_bins must be >= 1");
  for (auto h : hidden) require(h > 0, ErrorCode::InvalidArgument, "hidden layer widths must be positive");
  require(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0, ErrorCode::InvalidArgument,
          "test_fraction must lie in (0, 1)");
  auto opt = optimizer;
  opt.total_epochs = epochs;
  opt.validate();
  // Re-run factory checks for noise parameters that may have been set field-wise.
  (void)NoiseModel::make(noise.kind, noise.eta, noise.rate_std);
  switch (dataset.source) {
    case DatasetConfig::Source::Blobs:
      require(dataset.num_classes >= 2 && dataset.per_class >= 1 && dataset.dim >= 2 && dataset.separation > 0.0,
              ErrorCode::InvalidArgument, "blobs need classes >= 2, per_class >= 1, dim >= 2, separation > 0");
      break;
    case DatasetConfig::Source::Idx:
      require(!dataset.images_path.empty() && !dataset.labels_path.empty(), ErrorCode::InvalidArgument,
              "idx dataset needs images and labels paths");
      break;
    case DatasetConfig::Source::Csv:
      require(!dataset.csv_path.empty(), ErrorCode::InvalidArgument, "csv dataset needs a path");
      break;
  }
}

ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view parameter, double value) {
  ExperimentConfig cfg = base;
  if (parameter == "loss.a") {
    if (base.loss.family() == LossFamily::Combined) {
      cfg.loss = LossSpec::combined(base.loss.alpha(), base.loss.beta(),
                                    LossSpec::single(base.loss.passive().family(), value));
    } else {
      require(base.loss.family() == LossFamily::VCE || base.loss.family() == LossFamily::VEL ||
                  base.loss.family() == LossFamily::VSL,
              ErrorCode::InvalidArgument, "loss.a is not a parameter of " + base.loss.describe());
      cfg.loss = LossSpec::single(base.loss.family(), value);
    }
  } else if (parameter == "loss.alpha" || parameter == "loss.beta") {
    require(base.loss.family() == LossFamily::Combined, ErrorCode::InvalidArgument,
            std::string(parameter) + " needs a combined loss");
    const bool alpha = parameter == "loss.alpha";
    cfg.loss = LossSpec::combined(alpha ? value : base.loss.alpha(), alpha ? base.loss.beta() : value,
                                  base.loss.passive());
  } else if (parameter == "noise.eta") {
    cfg.noise = NoiseModel::make(base.noise.kind, value, base.noise.rate_std);
  } else {
    fail(ErrorCode::InvalidArgument,
         "unknown sweep parameter '" + std::string(parameter) + "' (loss.a|loss.alpha|loss.beta|noise.eta)");
  }
  return cfg;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  LabeledDataset full;
  switch (cfg.dataset.source) {
    case DatasetConfig::Source::Blobs:
      full = gen_gaussian_blobs(cfg.dataset.num_classes, cfg.dataset.per_class, cfg.dataset.dim,
                                cfg.dataset.separation, derive_seed(cfg.seed, purpose_tag("dataset")));
      break;
    case DatasetConfig::Source::Idx: full = load_idx_images(cfg.dataset.images_path, cfg.dataset.labels_path); break;
    case DatasetConfig::Source::Csv: full = load_dataset_csv(cfg.dataset.csv_path); break;
  }
  auto [train, test] = split_train_test(full, cfg.dataset.test_fraction, derive_seed(cfg.seed, purpose_tag("split")));
  if (cfg.dataset.standardize) {
    // Statistics come from the clean train split; labels play no role.
    const auto standardizer = Standardizer::fit(train.features);
    standardizer.apply(train.features);
    standardizer.apply(test.features);
  }
  return {std::move(train), std::move(test)};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, prepare_data(cfg)); }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto& train = data.train;
  const auto& test = data.test;
  require(train.num_classes == test.num_classes && train.dim() == test.dim(), ErrorCode::ContractViolation,
          "train and test splits disagree on shape");

  ExperimentResult result;
  const auto record = corrupt(cfg.noise, train, derive_seed(cfg.seed, purpose_tag("noise")));
  result.train_flip_fraction = record.flip_fraction();
  const std::vector<Label>& train_labels = record.noisy_labels;
  const std::vector<Label> clean_test_labels = test.labels;

  std::vector<std::size_t> dims{train.dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(train.num_classes);
  MlpModel model(dims, derive_seed(cfg.seed, purpose_tag("model")));
  OptimizerConfig opt_cfg = cfg.optimizer;
  opt_cfg.total_epochs = cfg.epochs;
  OptimizerState optimizer(opt_cfg, model);

  const std::size_t n = train.size();
  const auto k = static_cast<Eigen::Index>(train.num_classes);
  std::vector<std::size_t> order(n);
  const std::uint64_t shuffle_key = derive_seed(cfg.seed, purpose_tag("shuffle"));

  for (std::size_t epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle(shuffle_key, epoch);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> rows(order.data() + start, count);
      const auto trace = forward_trace(model, gather_rows(train.features, rows));
      Matrix dl_du(static_cast<Eigen::Index>(count), k);
      for (std::size_t r = 0; r < count; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const std::span<const double> u(trace.probs.data() + row * k, static_cast<std::size_t>(k));
        const auto y = static_cast<std::size_t>(train_labels[rows[r]]);
        loss_sum += loss_value_unchecked(cfg.loss, u, y);
        loss_grad_unchecked(cfg.loss, u, y, std::span<double>(dl_du.data() + row * k, static_cast<std::size_t>(k)));
      }
      try {
        optimizer.step(model, backward(model, trace, dl_du), epoch);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Divergence) throw;
        result.diverged = true;
        result.diagnostic = e.what();
        break;
      }
    }
    const double train_loss = loss_sum / static_cast<double>(n);
    if (!result.diverged && (!std::isfinite(train_loss) || !model.all_finite())) {
      result.diverged = true;
      result.diagnostic = "non-finite training loss or parameters at epoch " + std::to_string(epoch + 1);
    }
    if (result.diverged) break;

    const bool last = epoch + 1 == cfg.epochs;
    if ((epoch + 1) % cfg.eval_every == 0 || last) {
      require(test.labels == clean_test_labels, ErrorCode::Consistency, "test labels changed during training");
      const Matrix probs = forward(model, test.features).probs;
      MetricsRecord m;
      m.epoch = epoch + 1;
      m.train_loss = train_loss;
      m.test_accuracy = compute_accuracy(probs, test.labels);
      m.test_ece = compute_ece(probs, test.labels, cfg.ece_bins);
      m.lr = optimizer.config().learning_rate(epoch);
      result.metrics.push_back(m);
      if (last) result.reliability = reliability_diagram(probs, test.labels, cfg.ece_bins);
    }
  }

  auto& s = result.summary;
  for (const auto& m : result.metrics) {
    if (m.test_accuracy > s.best_acc || s.best_epoch == 0) {
      s.best_acc = m.test_accuracy;
      s.best_epoch = m.epoch;
    }
  }
  if (!result.metrics.empty()) s.last_acc = result.metrics.back().test_accuracy;
  s.gap = s.best_acc - s.last_acc;
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.model = std::move(model);
  return result;
}

double compute_accuracy(const Matrix& probs, std::span<const Label> labels) {
  check_prediction_inputs(probs, labels);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (predicted_class(probs, i) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

std::vector<ReliabilityBin> reliability_diagram(const Matrix& probs, std::span<const Label> labels,
                                                std::size_t n_bins) {
  check_prediction_inputs(probs, labels);
  require(n_bins >= 1, ErrorCode::InvalidArgument, "n_bins must be >= 1");
  std::vector<ReliabilityBin> bins(n_bins);
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<double> correct(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = static_cast<double>(b) / static_cast<double>(n_bins);
    bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const auto predicted = predicted_class(probs, i);
    const double confidence = probs(i, predicted);
    const auto b = bin_index(confidence, n_bins);
    ++bins[b].count;
    conf_sum[b] += confidence;
    if (predicted == labels[static_cast<std::size_t>(i)]) correct[b] += 1.0;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count == 0) continue;
    bins[b].avg_conf = conf_sum[b] / static_cast<double>(bins[b].count);
    bins[b].avg_acc = correct[b] / static_cast<double>(bins[b].count);
  }
  return bins;
}

double compute_ece(const Matrix& probs, std::span<const Label> labels, std::size_t n_bins) {
  const auto bins = reliability_diagram(probs, labels, n_bins);
  double ece = 0.0;
  for (const auto& b : bins) {
    ece += static_cast<double>(b.count) * std::abs(b.avg_acc - b.avg_conf);
  }
  return ece / static_cast<double>(probs.rows());
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, std::string_view parameter, std::span<const double> values,
                            std::size_t jobs) {
  require(!values.empty(), ErrorCode::InvalidArgument, "sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto cfg = with_parameter(base, parameter, values[i]);
    cfg.seed = base.seed + i * 1000;
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const auto result = run_experiment(configs[i]);
        rows[i] = {values[i], configs[i].seed, result.summary, result.diverged};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, configs.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> metrics) {
  out << "epoch,train_loss,test_acc,test_ece,lr\n";
  for (const auto& m : metrics) {
    out << m.epoch << ',' << num(m.train_loss) << ',' << num(m.test_accuracy) << ',' << num(m.test_ece) << ','
        << num(m.lr) << '\n';
  }
}

void write_reliability_csv(std::ostream& out, std::span<const ReliabilityBin> bins) {
  out << "bin_lo,bin_hi,count,avg_conf,avg_acc\n";
  for (const auto& b : bins) {
    out << num(b.lo) << ',' << num(b.hi) << ',' << b.count << ',' << num(b.avg_conf) << ',' << num(b.avg_acc) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "value,seed,best_acc,last_acc,gap,diverged\n";
  for (const auto& r : rows) {
    out << num(r.value) << ',' << r.seed << ',' << num(r.summary.best_acc) << ',' << num(r.summary.last_acc) << ','
        << num(r.summary.gap) << ',' << (r.diverged ? 1 : 0) << '\n';
  }
}

}  // namespace vblab

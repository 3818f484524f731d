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

#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vblab/analysis.hpp"
#include "vblab/noise.hpp"
#include "vblab/rng.hpp"
#include "vblab/trainer.hpp"

using namespace vblab;
using vblab::testing::oracles;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset.num_classes = 4;
  cfg.dataset.per_class = 60;
  cfg.dataset.dim = 5;
  cfg.dataset.separation = 6.0;
  cfg.hidden = {16};
  cfg.epochs = 6;
  cfg.batch_size = 16;
  cfg.seed = 21;
  return cfg;
}

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("accuracy") {
  const std::vector<Label> y = {0, 1, 2};
  CHECK(compute_accuracy(Matrix::Identity(3, 3), y) == 1.0);
  const std::vector<Label> zeros(5, 0);
  CHECK(compute_accuracy(Matrix::Constant(5, 4, 0.25), zeros) == 1.0);
  const auto four = rows_of({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}});
  const std::vector<Label> y4 = {0, 1, 1, 1};
  CHECK(compute_accuracy(four, y4) == 0.75);
  CHECK_THROWS_AS(compute_accuracy(Matrix(0, 3), std::vector<Label>{}), Error);
  CHECK_THROWS_AS(compute_accuracy(four, y), Error);
}

TEST_CASE("expected calibration error") {
  const auto probs = rows_of({{0.95, 0.05}, {0.55, 0.45}, {0.35, 0.65}});
  const std::vector<Label> y = {0, 1, 1};
  CHECK(std::abs(compute_ece(probs, y, 10) - oracles().at("ece_three_samples").get<double>()) < 1e-12);
  CHECK(std::abs(compute_ece(probs, y, 10) - 0.316667) < 1e-6);

  const std::vector<Label> y3 = {0, 1, 2};
  CHECK(compute_ece(Matrix::Identity(3, 3), y3, 10) == 0.0);

  // one bin: |accuracy - mean confidence|
  const double acc = compute_accuracy(probs, y);
  const double conf = (0.95 + 0.55 + 0.65) / 3.0;
  CHECK(compute_ece(probs, y, 1) == doctest::Approx(std::abs(acc - conf)).epsilon(1e-14));

  // right-closed bins: confidence 0.5 lands in (0.4, 0.5]
  const auto half = rows_of({{0.5, 0.5}});
  const auto bins = reliability_diagram(half, std::vector<Label>{0}, 10);
  CHECK(bins[4].count == 1);
  CHECK(bins[4].lo == doctest::Approx(0.4));
  CHECK(bins[4].hi == doctest::Approx(0.5));
  CHECK_THROWS_AS(compute_ece(probs, y, 0), Error);
}

TEST_CASE("no learning with a zero learning rate") {
  auto cfg = small_config();
  cfg.epochs = 1;
  cfg.optimizer.lr0 = 0.0;
  cfg.noise = NoiseModel::symmetric(0.2);
  const auto data = prepare_data(cfg);
  const auto result = run_experiment(cfg, data);
  REQUIRE(result.metrics.size() == 1);

  std::vector<std::size_t> dims = {data.train.dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(data.train.num_classes);
  const MlpModel untrained(dims, derive_seed(cfg.seed, purpose_tag("model")));
  const auto probs = forward(untrained, data.test.features).probs;
  CHECK(result.summary.last_acc == compute_accuracy(probs, data.test.labels));

  const auto noisy = corrupt(cfg.noise, data.train, derive_seed(cfg.seed, purpose_tag("noise")));
  CHECK(result.train_flip_fraction == noisy.flip_fraction());
  const auto train_probs = forward(untrained, data.train.features).probs;
  CHECK(result.metrics[0].train_loss ==
        doctest::Approx(empirical_risk(cfg.loss, train_probs, noisy.noisy_labels)).epsilon(1e-12));
}

TEST_CASE("clean blobs are learned") {
  ExperimentConfig cfg;  // K=10, 1000 per class, d=20, separation 8, 128x128
  cfg.epochs = 30;
  const auto result = run_experiment(cfg);
  CHECK(result.summary.last_acc >= 0.97);
  CHECK_FALSE(result.diverged);
}

TEST_CASE("metric series shape and summary invariants") {
  auto cfg = small_config();
  cfg.epochs = 10;
  cfg.eval_every = 3;
  cfg.noise = NoiseModel::symmetric(0.4);
  const auto r = run_experiment(cfg);
  REQUIRE(r.metrics.size() == 4);
  CHECK(r.metrics[0].epoch == 3);
  CHECK(r.metrics[3].epoch == 10);
  for (const auto& m : r.metrics) {
    CHECK(m.test_accuracy >= 0.0);
    CHECK(m.test_accuracy <= 1.0);
    CHECK(m.test_ece >= 0.0);
    CHECK(m.test_ece <= 1.0);
    CHECK(m.lr == doctest::Approx(cfg.optimizer.lr0 * 0.5 * (1 + std::cos(M_PI * (m.epoch - 1) / 10.0))));
  }
  CHECK(r.summary.best_acc >= r.summary.last_acc);
  CHECK(r.summary.gap >= 0.0);
  CHECK(r.summary.gap == r.summary.best_acc - r.summary.last_acc);
  CHECK(r.train_flip_fraction > 0.2);
  CHECK(r.reliability.size() == cfg.ece_bins);
  REQUIRE(r.model.has_value());
  CHECK(r.model->layer_dims() == std::vector<std::size_t>{5, 16, 4});

  cfg.eval_every = 5;
  CHECK(run_experiment(cfg).metrics.size() == 2);
}

TEST_CASE("training is deterministic under the seed") {
  auto cfg = small_config();
  cfg.noise = NoiseModel::instance_dependent(0.3);
  cfg.loss = LossSpec::combined(1.0, 0.5, LossSpec::vel(2.0));
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  std::ostringstream sa;
  std::ostringstream sb;
  write_metrics_csv(sa, a.metrics);
  write_metrics_csv(sb, b.metrics);
  CHECK(sa.str() == sb.str());
  CHECK(a.model->layers()[0].weights == b.model->layers()[0].weights);
  cfg.seed += 1;
  std::ostringstream sc;
  write_metrics_csv(sc, run_experiment(cfg).metrics);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("divergence yields a partial result") {
  auto cfg = small_config();
  cfg.optimizer.lr0 = 1e300;
  cfg.optimizer.schedule = Schedule::Constant;
  const auto r = run_experiment(cfg);
  CHECK(r.diverged);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(r.metrics.size() < cfg.epochs);
}

TEST_CASE("sweep parameters") {
  auto cfg = small_config();
  cfg.loss = LossSpec::vce(1.0);
  const std::vector<double> one = {3.0};
  const auto rows = sweep(cfg, "loss.a", one);
  REQUIRE(rows.size() == 1);
  const auto direct = run_experiment(with_parameter(cfg, "loss.a", 3.0));
  CHECK(rows[0].seed == cfg.seed);
  CHECK(rows[0].summary.last_acc == direct.summary.last_acc);
  CHECK(rows[0].summary.best_acc == direct.summary.best_acc);

  const std::vector<double> several = {0.5, 1.0, 2.0};
  const auto serial = sweep(cfg, "loss.a", several, 1);
  const auto parallel = sweep(cfg, "loss.a", several, 3);
  for (std::size_t i = 0; i < several.size(); ++i) {
    CHECK(serial[i].value == several[i]);
    CHECK(serial[i].seed == cfg.seed + i * 1000);
    CHECK(serial[i].summary.last_acc == parallel[i].summary.last_acc);
  }

  CHECK(with_parameter(cfg, "noise.eta", 0.3).noise.eta == 0.3);
  auto combined = cfg;
  combined.loss = LossSpec::combined(1.0, 1.0, LossSpec::vsl(0.5));
  CHECK(with_parameter(combined, "loss.beta", 2.0).loss.beta() == 2.0);
  CHECK(with_parameter(combined, "loss.alpha", 0.5).loss.alpha() == 0.5);
  CHECK(with_parameter(combined, "loss.a", 0.2).loss.passive() == LossSpec::vsl(0.2));
  CHECK_THROWS_AS(with_parameter(cfg, "optimizer.lr", 0.1), Error);
  CHECK_THROWS_AS(with_parameter(cfg, "loss.alpha", 0.1), Error);
  CHECK_THROWS_AS(with_parameter(small_config(), "loss.a", 0.1), Error);
  CHECK_THROWS_AS(with_parameter(cfg, "loss.a", -1.0), Error);
  CHECK_THROWS_AS(sweep(cfg, "loss.a", std::vector<double>{}), Error);
}

TEST_CASE("CSV writers") {
  std::ostringstream m;
  write_metrics_csv(m, std::vector<MetricsRecord>{{1, 0.5, 0.75, 0.1, 0.01}});
  CHECK(m.str() == "epoch,train_loss,test_acc,test_ece,lr\n1,0.5,0.75,0.1,0.01\n");
  std::ostringstream r;
  write_reliability_csv(r, std::vector<ReliabilityBin>{{0.0, 0.5, 3, 0.25, 0.5}});
  CHECK(r.str() == "bin_lo,bin_hi,count,avg_conf,avg_acc\n0,0.5,3,0.25,0.5\n");
  std::ostringstream s;
  SweepRow row;
  row.value = 2.0;
  row.seed = 1123;
  row.summary.best_acc = 0.9;
  row.summary.last_acc = 0.8;
  row.summary.gap = 0.1;
  write_sweep_csv(s, std::vector<SweepRow>{row});
  CHECK(s.str() == "value,seed,best_acc,last_acc,gap,diverged\n2,1123,0.9,0.8,0.1,0\n");
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.dataset.test_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.dataset.source = DatasetConfig::Source::Csv;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

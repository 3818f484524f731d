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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and nowhere else. The memorization criterion trains 36 models and
// dominates the runtime (several minutes on one core).

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vblab/analysis.hpp"
#include "vblab/losses.hpp"
#include "vblab/nn.hpp"
#include "vblab/noise.hpp"
#include "vblab/rng.hpp"
#include "vblab/trainer.hpp"

using namespace vblab;

namespace {

constexpr double kRatioRelTol = 1e-4;
constexpr double kLossGradRelTol = 1e-5;
constexpr double kMlpGradRelTol = 1e-4;
constexpr double kDefectSlack = 1e-9;
constexpr double kExactTol = 1e-12;
constexpr double kSigmaBand = 4.0;
constexpr double kTransitionTol = 0.01;
constexpr double kGapMargin = 0.05;
constexpr double kAccuracyMargin = 0.10;
constexpr double kCleanAccuracy = 0.95;
constexpr double kEceTol = 1e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> random_simplex(CounterRng& rng, std::size_t k, double floor) {
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& x : p) {
    x = -std::log(rng.uniform_open_low());
    total += x;
  }
  for (auto& x : p) x = floor + (1.0 - floor * static_cast<double>(k)) * x / total;
  return p;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

Verdict closed_form_ratios() {
  CounterRng rng(101, 0);
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    for (const auto& spec : {LossSpec::vce(0.05 + rng.uniform() * 20.0), LossSpec::vel(1.01 + rng.uniform() * 20.0),
                             LossSpec::vsl(0.01 + rng.uniform() * 0.98)}) {
      const double closed = variation_ratio_closed(spec).variation_ratio.value();
      const double a = spec.a();
      double formula = 0.0;
      switch (spec.family()) {
        case LossFamily::VCE: formula = (1.0 + a) / a; break;
        case LossFamily::VEL: formula = a; break;
        default: formula = (a + 1.0) * std::log(2.0) / (std::log(2.0) - std::log(a + 1.0)); break;
      }
      worst = std::max(worst, rel_err(closed, formula));
      worst = std::max(worst, rel_err(variation_ratio_numeric(spec, 10000).variation_ratio.value(), closed));
      ++checked;
    }
  }
  const bool fixed = variation_ratio_closed(LossSpec::mae()).variation_ratio.value() == 1.0 &&
                     rel_err(variation_ratio_closed(LossSpec::el()).variation_ratio.value(), std::exp(1.0)) < 1e-15 &&
                     rel_err(variation_ratio_numeric(LossSpec::el(), 10000).variation_ratio.value(), std::exp(1.0)) <
                         kRatioRelTol;
  return {fixed && worst < kRatioRelTol,
          std::to_string(checked) + " hyperparameters, max rel err " + fmt(worst)};
}

double mean_loss(const LossSpec& spec, const MlpModel& model, const Matrix& x, const std::vector<Label>& y) {
  const auto out = forward(model, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < out.probs.rows(); ++i) {
    const RowVector row = out.probs.row(i);
    total += loss_value_unchecked(spec, {row.data(), static_cast<std::size_t>(row.size())}, y[i]);
  }
  return total / static_cast<double>(out.probs.rows());
}

Verdict gradient_suite() {
  CounterRng rng(202, 0);
  const double h = 1e-5;
  double worst_loss = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<LossSpec> specs = {
        LossSpec::ce(),
        LossSpec::mae(),
        LossSpec::el(),
        LossSpec::sl(),
        LossSpec::nce(),
        LossSpec::vce(0.05 + rng.uniform() * 10.0),
        LossSpec::vel(1.01 + rng.uniform() * 10.0),
        LossSpec::vsl(0.01 + rng.uniform() * 0.98),
        LossSpec::combined(rng.uniform() * 2.0, rng.uniform() * 2.0, LossSpec::vce(0.5 + rng.uniform() * 5.0))};
    for (const auto& spec : specs) {
      const std::size_t k = 2 + rng.below(9);
      const std::size_t label = rng.below(k);
      // 0.01 floor keeps the central-difference truncation error small
      const auto p = random_simplex(rng, k, 0.01);
      std::vector<double> grad(k);
      loss_grad_unchecked(spec, p, label, grad);
      for (std::size_t j = 0; j < k; ++j) {
        auto up = p;
        auto dn = p;
        up[j] += h;
        dn[j] -= h;
        const double fd = (loss_value_unchecked(spec, up, label) - loss_value_unchecked(spec, dn, label)) / (2 * h);
        worst_loss = std::max(worst_loss, std::abs(fd) < 1e-8 ? std::abs(grad[j]) : rel_err(grad[j], fd));
      }
    }
  }

  double worst_mlp = 0.0;
  const Matrix x = Matrix::NullaryExpr(8, 5, [&] { return rng.normal(); });
  std::vector<Label> y(8);
  for (auto& l : y) l = static_cast<Label>(rng.below(3));
  for (const auto& spec : {LossSpec::ce(), LossSpec::mae(), LossSpec::vce(2.0), LossSpec::vel(1.5),
                           LossSpec::vsl(0.1), LossSpec::combined(1.0, 1.0, LossSpec::vce(5.0))}) {
    MlpModel model({5, 6, 3}, 7);
    const auto trace = forward_trace(model, x);
    Matrix upstream(trace.probs.rows(), trace.probs.cols());
    for (Eigen::Index i = 0; i < upstream.rows(); ++i) {
      const RowVector row = trace.probs.row(i);
      RowVector g(row.size());
      loss_grad_unchecked(spec, {row.data(), static_cast<std::size_t>(row.size())}, y[i],
                          {g.data(), static_cast<std::size_t>(g.size())});
      upstream.row(i) = g;
    }
    const auto grads = backward(model, trace, upstream);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
      auto& w = model.layers()[l].weights;
      for (Eigen::Index idx = 0; idx < w.size(); ++idx) {
        double& p = w.data()[idx];
        const double keep = p;
        p = keep + h;
        const double up = mean_loss(spec, model, x, y);
        p = keep - h;
        const double dn = mean_loss(spec, model, x, y);
        p = keep;
        const double fd = (up - dn) / (2 * h);
        const double an = grads.weights[l].data()[idx];
        worst_mlp = std::max(worst_mlp, std::abs(fd) < 1e-7 ? std::abs(an) : rel_err(an, fd));
      }
    }
  }
  return {worst_loss < kLossGradRelTol && worst_mlp < kMlpGradRelTol,
          "loss max rel err " + fmt(worst_loss) + ", MLP max rel err " + fmt(worst_mlp)};
}

Verdict defect_within_ratio() {
  CounterRng rng(303, 0);
  int violations = 0;
  int cases = 0;
  double tightest = INFINITY;
  for (std::size_t k : {2, 5, 10}) {
    const std::vector<LossSpec> specs = {LossSpec::mae(),
                                         LossSpec::el(),
                                         LossSpec::vce(0.2 + rng.uniform() * 8.0),
                                         LossSpec::vel(1.05 + rng.uniform() * 4.0),
                                         LossSpec::vsl(0.05 + rng.uniform() * 0.9)};
    for (const auto& spec : specs) {
      const double v = variation_ratio_closed(spec).variation_ratio.value();
      const double d = symmetric_defect(spec, k, 10000, 1000 + cases);
      if (d > v - 1.0 + kDefectSlack) ++violations;
      tightest = std::min(tightest, (v - 1.0) - d);
      ++cases;
    }
  }
  return {violations == 0, std::to_string(cases) + " (family, K) cases x 1e4 pairs, " + std::to_string(violations) +
                               " violations, smallest slack " + fmt(tightest)};
}

Verdict certificate_oracle() {
  CounterRng rng(404, 0);
  int certified = 0;
  int mismatches = 0;
  auto check = [&](const LossSpec& spec, const std::vector<double>& w) {
    const auto t = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const auto best = argmin_weighted_risk_bruteforce(spec, w, 0.01);
    if (best.point[t] != 1.0) ++mismatches;
  };
  const std::vector<double> boundary = {0.7, 0.2, 0.1};
  const bool boundary_certified = certify_asymmetric(LossSpec::vce(0.4), boundary) != Certificate::NotCertified;
  check(LossSpec::vce(0.4), boundary);
  int attempts = 0;
  while (certified < 200 && attempts < 5000) {
    ++attempts;
    LossSpec spec = LossSpec::mae();
    switch (rng.below(5)) {
      case 0: spec = LossSpec::mae(); break;
      case 1: spec = LossSpec::el(); break;
      case 2: spec = LossSpec::vce(0.05 + rng.uniform() * 10.0); break;
      case 3: spec = LossSpec::vel(1.01 + rng.uniform() * 5.0); break;
      default: spec = LossSpec::vsl(0.01 + rng.uniform() * 0.98); break;
    }
    const auto w = random_simplex(rng, 3, 0.0);
    if (certify_asymmetric(spec, w) == Certificate::NotCertified) continue;
    ++certified;
    check(spec, w);
  }
  return {certified == 200 && mismatches == 0,
          std::to_string(certified) + " certified cases, " + std::to_string(mismatches) +
              " mismatches; VCE(0.4) at (0.7,0.2,0.1) " + (boundary_certified ? "certified" : "not certified") +
              " and checked"};
}

Verdict worked_numbers() {
  const double t = asymmetry_threshold(NoiseModel::symmetric(0.8), 10).value();
  const double b = excess_risk_bound_symmetric(LossSpec::vce(4.0), 10, 0.4).risk_gap_bound;
  return {std::abs(t - 2.25) < kExactTol && std::abs(b - 0.02) < kExactTol,
          "threshold " + fmt(t) + ", bound " + fmt(b)};
}

Verdict noise_generators() {
  constexpr std::size_t n = 100000;
  auto balanced = [](std::size_t k) {
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<Label>(i % k);
    return y;
  };
  auto within = [](double observed, double target) {
    return std::abs(observed - target) <= kSigmaBand * std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  };
  // largest |empirical - analytic| transition entry
  auto transition_error = [&](const NoiseModel& model, std::size_t k, const CorruptionRecord& rec,
                              const std::vector<Label>& y) {
    const Matrix m = empirical_transition_matrix(y, rec.noisy_labels, k);
    return (m - analytic_transition_matrix(model, k)).cwiseAbs().maxCoeff();
  };
  bool ok = true;
  std::ostringstream detail;

  for (const auto& [k, eta] : {std::pair<std::size_t, double>{5, 0.3}, {2, 0.4}}) {
    const auto y = balanced(k);
    const auto rec = corrupt_symmetric(y, k, eta, 11 + k);
    const double err = transition_error(NoiseModel::symmetric(eta), k, rec, y);
    ok = ok && within(rec.flip_fraction(), eta) && err < kTransitionTol;
    detail << "symmetric K=" << k << " flip " << rec.flip_fraction() << "/" << eta << " T err " << err << "; ";
  }

  const auto y4 = balanced(4);
  const auto circ = corrupt_asymmetric_circular(y4, 4, 0.4, 12);
  const double circ_err = transition_error(NoiseModel::asymmetric_circular(0.4), 4, circ, y4);
  ok = ok && within(circ.flip_fraction(), 0.4) && circ_err < kTransitionTol;
  detail << "circular K=4 flip " << circ.flip_fraction() << "/0.4 T err " << circ_err << "; ";

  CounterRng rng(13, 0);
  const auto y10 = balanced(10);
  const Matrix x = Matrix::NullaryExpr(static_cast<Eigen::Index>(n), 8, [&] { return rng.normal(); });
  const auto idn = corrupt_instance_dependent(x, y10, 10, 0.4, 0.1, 14);
  ok = ok && within(idn.flip_fraction(), 0.4);
  detail << "instance-dependent K=10 flip " << idn.flip_fraction() << "/0.4";
  return {ok, detail.str()};
}

Verdict memorization() {
  const std::vector<LossSpec> clean_families = {LossSpec::ce(),      LossSpec::mae(),
                                                LossSpec::el(),      LossSpec::sl(),
                                                LossSpec::nce(),     LossSpec::vce(2.0),
                                                LossSpec::vel(1.5),  LossSpec::vsl(0.1),
                                                LossSpec::combined(1.0, 1.0, LossSpec::vce(2.0))};
  double ce_gap = 0.0;
  double vce_gap = 0.0;
  double ce_last = 0.0;
  double combo_last = 0.0;
  double worst_clean = 1.0;
  std::string worst_family;
  const std::vector<std::uint64_t> seeds = {123, 124, 125};
  for (auto seed : seeds) {
    ExperimentConfig base;  // K=10, 1000 per class, d=20, 128x128 MLP, 100 epochs
    base.seed = seed;
    const auto clean_data = prepare_data(base);

    auto noisy = base;
    noisy.noise = NoiseModel::symmetric(0.6);
    noisy.loss = LossSpec::ce();
    const auto ce = run_experiment(noisy, clean_data);
    noisy.loss = LossSpec::vce(2.0);
    const auto vce = run_experiment(noisy, clean_data);
    noisy.loss = LossSpec::combined(1.0, 1.0, LossSpec::vce(2.0));
    const auto combo = run_experiment(noisy, clean_data);
    ce_gap += ce.summary.gap / 3.0;
    vce_gap += vce.summary.gap / 3.0;
    ce_last += ce.summary.last_acc / 3.0;
    combo_last += combo.summary.last_acc / 3.0;
    std::cerr << "  seed " << seed << ": CE best " << ce.summary.best_acc << " last " << ce.summary.last_acc
              << ", VCE(2) gap " << vce.summary.gap << ", NCE+VCE last " << combo.summary.last_acc << "\n";

    for (const auto& spec : clean_families) {
      auto clean = base;
      clean.loss = spec;
      const auto r = run_experiment(clean, clean_data);
      if (r.summary.last_acc < worst_clean) {
        worst_clean = r.summary.last_acc;
        worst_family = spec.describe();
      }
    }
  }
  const bool a = ce_gap - vce_gap >= kGapMargin;
  const bool b = combo_last - ce_last >= kAccuracyMargin;
  const bool c = worst_clean >= kCleanAccuracy;
  std::ostringstream d;
  d << "(a) gap CE " << ce_gap << " vs VCE(2) " << vce_gap << (a ? " ok" : " FAIL") << "; (b) last acc NCE+VCE "
    << combo_last << " vs CE " << ce_last << (b ? " ok" : " FAIL") << "; (c) worst clean " << worst_clean << " ("
    << worst_family << ")" << (c ? " ok" : " FAIL");
  return {a && b && c, d.str()};
}

Verdict calibration() {
  Matrix probs(3, 2);
  probs << 0.95, 0.05, 0.55, 0.45, 0.35, 0.65;
  const std::vector<Label> y = {0, 1, 1};
  const double ece = compute_ece(probs, y, 10);
  const std::vector<Label> y3 = {0, 1, 2};
  const double perfect = compute_ece(Matrix::Identity(3, 3), y3, 10);
  // 0.316667 is 0.95 / 3 rounded
  return {std::abs(ece - 0.95 / 3.0) <= kEceTol && perfect == 0.0,
          "fixture " + fmt(ece) + ", perfect " + fmt(perfect)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict cli_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("vblab_accept_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  std::ofstream(dir / "run.json") << R"({"version": 1,
    "dataset": {"kind": "blobs", "classes": 5, "per_class": 200, "dim": 10, "separation": 6},
    "noise": {"kind": "idn", "eta": 0.3, "rate_std": 0.1},
    "loss": {"family": "nce+vbl", "alpha": 1, "beta": 1, "passive": {"family": "vel", "a": 1.5}},
    "model": {"hidden": [64, 64]},
    "epochs": 10, "batch_size": 32, "seed": 77, "deterministic": true})";
  int status = 0;
  for (const char* out : {"a", "b"}) {
    const std::string cmd = std::string(VBLAB_CLI) + " train --config '" + (dir / "run.json").string() +
                            "' --out-dir '" + (dir / out).string() + "' > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    status |= WIFEXITED(raw) ? WEXITSTATUS(raw) : 1;
  }
  const auto a = slurp(dir / "a" / "metrics.csv");
  const auto b = slurp(dir / "b" / "metrics.csv");
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  const bool same = status == 0 && !a.empty() && a == b;
  return {same, "two CLI runs, exit status " + std::to_string(status) + ", " + std::to_string(a.size()) +
                    " byte metrics " + (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"closed-form variation ratios", closed_form_ratios},
      {"gradient suite", gradient_suite},
      {"symmetric defect within v-1", defect_within_ratio},
      {"certificate matches brute-force argmin", certificate_oracle},
      {"worked threshold and bound", worked_numbers},
      {"noise generators", noise_generators},
      {"memorization on noisy blobs", memorization},
      {"calibration error fixture", calibration},
      {"deterministic CLI metrics", cli_determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

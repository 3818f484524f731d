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

// Drives the vblab executable as a subprocess.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using nlohmann::json;
using vblab::testing::slurp;
using vblab::testing::TempDir;
using vblab::testing::write_file;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

// stderr is folded into the captured output.
Outcome run(const std::string& args) {
  const std::string cmd = std::string(VBLAB_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

json run_json(const std::string& args) {
  const auto o = run(args);
  INFO(o.out);
  REQUIRE(o.status == 0);
  return json::parse(o.out);
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

const char* kTinyRun = R"({"version": 1,
  "dataset": {"kind": "blobs", "classes": 3, "per_class": 40, "dim": 4, "separation": 6},
  "noise": {"kind": "symmetric", "eta": 0.3},
  "loss": {"family": "nce+vbl", "alpha": 1, "beta": 1, "passive": {"family": "vce", "a": 2}},
  "model": {"hidden": [8]},
  "epochs": 5, "batch_size": 16, "seed": 17, "deterministic": true})";

}  // namespace

TEST_CASE("analyze prints ratios and bounds") {
  const auto vce = run_json("analyze --loss vce --a 4 --noise symmetric --eta 0.4 --k 10");
  CHECK(vce.at("variation_ratio") == 1.25);
  CHECK(vce.at("bounds").at(0).at("risk_gap_bound").get<double>() == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(vce.at("certified") == true);

  CHECK(run_json("analyze --loss ce").at("variation_ratio") == "inf");
  CHECK(run_json("analyze --loss el").at("variation_ratio").get<double>() == doctest::Approx(std::exp(1.0)));

  const auto mae = run_json("analyze --loss mae --noise symmetric --eta 0.8 --k 10");
  CHECK(mae.at("asymmetry_threshold") == 2.25);
  CHECK(mae.at("certificate") == "certified_by_concavity");

  const auto numeric = run_json("analyze --loss vsl --a 0.5 --numeric");
  CHECK(numeric.at("numeric").at("variation_ratio").get<double>() ==
        doctest::Approx(numeric.at("variation_ratio").get<double>()).epsilon(1e-4));

  TempDir dir("cli_curve");
  const auto curve = dir / "curve.csv";
  run_json("analyze --loss vel --a 2 --curve " + quoted(curve) + " --curve-points 11");
  CHECK(slurp(curve).rfind("u,grad_abs\n", 0) == 0);
}

TEST_CASE("analyze rejects invalid hyperparameters") {
  const auto o = run("analyze --loss vel --a 0.5");
  CHECK(o.status == 2);
  CHECK(run("analyze --loss nonsense").status == 2);
}

TEST_CASE("corrupt flips close to the requested rate") {
  TempDir dir("cli_corrupt");
  std::string labels;
  for (int i = 0; i < 5000; ++i) labels += std::to_string(i % 5) + "\n";
  write_file(dir / "labels.txt", labels);
  const auto report = run_json("corrupt --kind symmetric --eta 0.3 --k 5 --seed 7 --labels " +
                               quoted(dir / "labels.txt") + " --out " + quoted(dir / "noisy.csv") + " --stats");
  const double sigma = std::sqrt(0.3 * 0.7 / 5000.0);
  CHECK(std::abs(report.at("flip_fraction").get<double>() - 0.3) < 4 * sigma);
  CHECK(report.at("transition_matrix").size() == 5);
  CHECK(slurp(dir / "noisy.csv").rfind("index,clean_label,noisy_label,flipped\n", 0) == 0);

  // the environment seed stands in for a missing --seed
  const auto args = "corrupt --kind symmetric --eta 0.3 --k 5 --labels " + quoted(dir / "labels.txt");
  const auto flagged = run_json(args + " --out " + quoted(dir / "a.csv") + " --seed 31");
  setenv("VBLAB_SEED", "31", 1);
  const auto env = run_json(args + " --out " + quoted(dir / "b.csv"));
  unsetenv("VBLAB_SEED");
  CHECK(env.at("seed") == 31);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(flagged.at("flip_fraction") == env.at("flip_fraction"));

  CHECK(run("corrupt --kind symmetric --eta 1.2 --k 5 --labels " + quoted(dir / "labels.txt")).status == 2);
}

TEST_CASE("missing config is a usage error naming the path") {
  const auto o = run("train --config /no/such/config.json");
  CHECK(o.status == 2);
  CHECK(o.out.find("/no/such/config.json") != std::string::npos);
  CHECK(run("sweep --config /no/such/config.json --param loss.a --values 1").status == 2);
}

TEST_CASE("help for every subcommand") {
  for (const char* sub : {"", "analyze", "corrupt", "dataset", "train", "sweep"}) {
    INFO(sub);
    CHECK(run(std::string(sub) + " --help").status == 0);
  }
}

TEST_CASE("train writes outputs and is reproducible") {
  TempDir dir("cli_train");
  write_file(dir / "run.json", kTinyRun);
  const auto a = dir / "a";
  const auto b = dir / "b";
  std::filesystem::create_directories(a);
  std::filesystem::create_directories(b);
  REQUIRE(run("train --config " + quoted(dir / "run.json") + " --out-dir " + quoted(a)).status == 0);
  REQUIRE(run("train --config " + quoted(dir / "run.json") + " --out-dir " + quoted(b)).status == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "metrics.csv").rfind("epoch,train_loss,test_acc,test_ece,lr\n", 0) == 0);
  const auto summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary.at("evaluations") == 5);
  const auto resolved = json::parse(slurp(a / "resolved_config.json"));
  CHECK(resolved.at("seed") == 17);
  CHECK(std::filesystem::exists(a / "reliability.csv"));

  // --seed overrides the file
  const auto c = dir / "c";
  std::filesystem::create_directories(c);
  REQUIRE(run("train --config " + quoted(dir / "run.json") + " --out-dir " + quoted(c) + " --seed 18").status == 0);
  CHECK(json::parse(slurp(c / "resolved_config.json")).at("seed") == 18);
  CHECK(slurp(c / "metrics.csv") != slurp(a / "metrics.csv"));
}

TEST_CASE("divergence exits with its own status") {
  TempDir dir("cli_diverge");
  auto cfg = json::parse(kTinyRun);
  cfg["optimizer"] = {{"lr", 1e300}, {"schedule", "constant"}};
  write_file(dir / "run.json", cfg.dump());
  CHECK(run("train --config " + quoted(dir / "run.json") + " --out-dir " + quoted(dir.path())).status == 3);
}

TEST_CASE("sweep writes one row per value") {
  TempDir dir("cli_sweep");
  write_file(dir / "run.json", kTinyRun);
  const auto out = dir / "sweep.csv";
  REQUIRE(run("--jobs 2 sweep --config " + quoted(dir / "run.json") + " --param loss.a --values 1,4 --out " +
              quoted(out))
              .status == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("value,seed,best_acc,last_acc,gap,diverged\n1,17,", 0) == 0);
  CHECK(text.find("\n4,1017,") != std::string::npos);
  CHECK(run("sweep --config " + quoted(dir / "run.json") + " --param model.width --values 1").status == 2);
}

TEST_CASE("dataset subcommands") {
  TempDir dir("cli_dataset");
  const auto csv = dir / "blobs.csv";
  REQUIRE(run("dataset gen --k 3 --per-class 20 --dim 2 --seed 4 --out " + quoted(csv)).status == 0);
  const auto info = run_json("dataset load --dataset " + quoted(csv));
  CHECK(info.at("size") == 60);
  REQUIRE(run("dataset split --dataset " + quoted(csv) + " --test-fraction 0.25 --train-out " + quoted(dir / "tr.csv") +
              " --test-out " + quoted(dir / "te.csv"))
              .status == 0);
  CHECK(std::filesystem::exists(dir / "te.csv"));
}

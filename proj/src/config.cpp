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

#include "vblab/config.hpp"

#include <initializer_list>
#include <set>

#include "json.hpp"

namespace vblab {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, std::string_view where, std::initializer_list<std::string_view> known) {
  require(object.is_object(), ErrorCode::InvalidArgument, std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : object.items()) {
    bool found = false;
    for (auto k : known) found = found || key == k;
    require(found, ErrorCode::InvalidArgument, "unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& object, const char* key, T& out, std::string_view where) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidArgument, std::string(where) + "." + key + " has the wrong type");
  }
}

LossSpec parse_loss(const json& j, std::string_view where) {
  reject_unknown_keys(j, where, {"family", "a", "alpha", "beta", "active", "passive"});
  std::string family_name;
  read(j, "family", family_name, where);
  require(!family_name.empty(), ErrorCode::InvalidArgument, std::string(where) + ".family is required");
  const auto family = parse_loss_family(family_name);
  double a = 0.0;
  read(j, "a", a, where);
  if (family != LossFamily::Combined) return LossSpec::single(family, a);

  double alpha = 1.0;
  double beta = 1.0;
  read(j, "alpha", alpha, where);
  read(j, "beta", beta, where);
  require(j.contains("passive"), ErrorCode::InvalidArgument, std::string(where) + ".passive is required");
  const auto passive = parse_loss(j.at("passive"), std::string(where) + ".passive");
  const auto active = j.contains("active") ? parse_loss(j.at("active"), std::string(where) + ".active") : LossSpec::nce();
  return LossSpec::combined(alpha, beta, active, passive);
}

json loss_to_json(const LossSpec& loss) {
  json j{{"family", std::string(to_string(loss.family()))}};
  switch (loss.family()) {
    case LossFamily::VCE:
    case LossFamily::VEL:
    case LossFamily::VSL: j["a"] = loss.a(); break;
    case LossFamily::Combined:
      j["alpha"] = loss.alpha();
      j["beta"] = loss.beta();
      j["active"] = loss_to_json(loss.active());
      j["passive"] = loss_to_json(loss.passive());
      break;
    default: break;
  }
  return j;
}

json experiment_to_json(const ExperimentConfig& e) {
  json dataset{{"kind", std::string(to_string(e.dataset.source))},
               {"test_fraction", e.dataset.test_fraction},
               {"standardize", e.dataset.standardize}};
  switch (e.dataset.source) {
    case DatasetConfig::Source::Blobs:
      dataset["classes"] = e.dataset.num_classes;
      dataset["per_class"] = e.dataset.per_class;
      dataset["dim"] = e.dataset.dim;
      dataset["separation"] = e.dataset.separation;
      break;
    case DatasetConfig::Source::Idx:
      dataset["images"] = e.dataset.images_path;
      dataset["labels"] = e.dataset.labels_path;
      break;
    case DatasetConfig::Source::Csv: dataset["path"] = e.dataset.csv_path; break;
  }
  json noise{{"kind", std::string(to_string(e.noise.kind))}, {"eta", e.noise.eta}};
  if (e.noise.kind == NoiseKind::InstanceDependent) noise["rate_std"] = e.noise.rate_std;
  return json{{"version", kConfigVersion},
              {"dataset", dataset},
              {"noise", noise},
              {"loss", loss_to_json(e.loss)},
              {"model", {{"hidden", e.hidden}}},
              {"optimizer",
               {{"lr", e.optimizer.lr0},
                {"momentum", e.optimizer.momentum},
                {"l1_decay", e.optimizer.l1_decay},
                {"schedule", std::string(to_string(e.optimizer.schedule))}}},
              {"epochs", e.epochs},
              {"batch_size", e.batch_size},
              {"seed", e.seed},
              {"eval_every", e.eval_every},
              {"ece_bins", e.ece_bins},
              {"deterministic", e.deterministic}};
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(doc, "config",
                      {"version", "dataset", "noise", "loss", "model", "optimizer", "epochs", "batch_size", "seed",
                       "eval_every", "ece_bins", "deterministic", "output"});
  require(doc.contains("version"), ErrorCode::InvalidArgument, "config.version is required");
  int version = 0;
  read(doc, "version", version, "config");
  require(version == kConfigVersion, ErrorCode::InvalidArgument,
          "unsupported config version " + std::to_string(version) + " (expected 1)");

  RunConfig rc;
  auto& e = rc.experiment;
  if (doc.contains("dataset")) {
    const auto& d = doc.at("dataset");
    reject_unknown_keys(d, "dataset",
                        {"kind", "classes", "per_class", "dim", "separation", "images", "labels", "path",
                         "test_fraction", "standardize"});
    std::string kind = "blobs";
    read(d, "kind", kind, "dataset");
    if (kind == "blobs") {
      e.dataset.source = DatasetConfig::Source::Blobs;
    } else if (kind == "idx") {
      e.dataset.source = DatasetConfig::Source::Idx;
    } else if (kind == "csv") {
      e.dataset.source = DatasetConfig::Source::Csv;
    } else {
      fail(ErrorCode::InvalidArgument, "dataset.kind must be blobs, idx or csv");
    }
    read(d, "classes", e.dataset.num_classes, "dataset");
    read(d, "per_class", e.dataset.per_class, "dataset");
    read(d, "dim", e.dataset.dim, "dataset");
    read(d, "separation", e.dataset.separation, "dataset");
    read(d, "images", e.dataset.images_path, "dataset");
    read(d, "labels", e.dataset.labels_path, "dataset");
    read(d, "path", e.dataset.csv_path, "dataset");
    read(d, "test_fraction", e.dataset.test_fraction, "dataset");
    read(d, "standardize", e.dataset.standardize, "dataset");
  }
  if (doc.contains("noise")) {
    const auto& n = doc.at("noise");
    reject_unknown_keys(n, "noise", {"kind", "eta", "rate_std"});
    std::string kind = "symmetric";
    double eta = 0.0;
    double rate_std = 0.1;
    read(n, "kind", kind, "noise");
    read(n, "eta", eta, "noise");
    read(n, "rate_std", rate_std, "noise");
    e.noise = NoiseModel::make(parse_noise_kind(kind), eta, rate_std);
  }
  if (doc.contains("loss")) e.loss = parse_loss(doc.at("loss"), "loss");
  if (doc.contains("model")) {
    reject_unknown_keys(doc.at("model"), "model", {"hidden"});
    read(doc.at("model"), "hidden", e.hidden, "model");
  }
  if (doc.contains("optimizer")) {
    const auto& o = doc.at("optimizer");
    reject_unknown_keys(o, "optimizer", {"lr", "momentum", "l1_decay", "schedule"});
    read(o, "lr", e.optimizer.lr0, "optimizer");
    read(o, "momentum", e.optimizer.momentum, "optimizer");
    read(o, "l1_decay", e.optimizer.l1_decay, "optimizer");
    std::string schedule(to_string(e.optimizer.schedule));
    read(o, "schedule", schedule, "optimizer");
    e.optimizer.schedule = parse_schedule(schedule);
  }
  read(doc, "epochs", e.epochs, "config");
  read(doc, "batch_size", e.batch_size, "config");
  read(doc, "seed", e.seed, "config");
  read(doc, "eval_every", e.eval_every, "config");
  read(doc, "ece_bins", e.ece_bins, "config");
  read(doc, "deterministic", e.deterministic, "config");
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    reject_unknown_keys(o, "output", {"metrics", "summary", "reliability", "checkpoint", "resolved_config"});
    read(o, "metrics", rc.outputs.metrics, "output");
    read(o, "summary", rc.outputs.summary, "output");
    read(o, "reliability", rc.outputs.reliability, "output");
    read(o, "checkpoint", rc.outputs.checkpoint, "output");
    read(o, "resolved_config", rc.outputs.resolved_config, "output");
  }
  e.optimizer.total_epochs = e.epochs;
  e.validate();
  return rc;
}

std::string dump_run_config(const RunConfig& config) {
  auto doc = experiment_to_json(config.experiment);
  doc["output"] = {{"metrics", config.outputs.metrics},
                   {"summary", config.outputs.summary},
                   {"reliability", config.outputs.reliability},
                   {"checkpoint", config.outputs.checkpoint},
                   {"resolved_config", config.outputs.resolved_config}};
  return doc.dump(2) + "\n";
}

std::string summary_json(const RunConfig& config, const ExperimentResult& result) {
  json doc{{"config", experiment_to_json(config.experiment)},
           {"best_acc", result.summary.best_acc},
           {"best_epoch", result.summary.best_epoch},
           {"last_acc", result.summary.last_acc},
           {"gap", result.summary.gap},
           {"train_flip_fraction", result.train_flip_fraction},
           {"evaluations", result.metrics.size()},
           {"diverged", result.diverged},
           {"wall_clock_seconds", result.summary.wall_seconds}};
  if (result.diverged) doc["diagnostic"] = result.diagnostic;
  return doc.dump(2) + "\n";
}

}  // namespace vblab

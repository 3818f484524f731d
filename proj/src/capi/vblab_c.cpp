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

#include "vblab/vblab.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "vblab/analysis.hpp"
#include "vblab/config.hpp"
#include "vblab/data.hpp"
#include "vblab/losses.hpp"
#include "vblab/nn.hpp"
#include "vblab/noise.hpp"
#include "vblab/trainer.hpp"

struct vblab_loss {
  vblab::LossSpec spec;
};

struct vblab_dataset {
  vblab::LabeledDataset data;
};

struct vblab_labels {
  std::vector<vblab::Label> values;
};

struct vblab_corruption {
  vblab::CorruptionRecord record;
};

struct vblab_experiment {
  vblab::RunConfig config;
};

struct vblab_run {
  vblab::ExperimentResult result;
};

namespace {

thread_local std::string g_last_error;

vblab_status to_status(vblab::ErrorCode code) {
  return static_cast<vblab_status>(static_cast<int>(code));
}

template <typename F>
vblab_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return VBLAB_OK;
  } catch (const vblab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VBLAB_ERR_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VBLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return VBLAB_ERR_INTERNAL;
  }
}

void need(const void* ptr, const char* what) {
  vblab::require(ptr != nullptr, vblab::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

vblab::LossFamily to_family(vblab_loss_family f) {
  vblab::require(f >= VBLAB_LOSS_CE && f <= VBLAB_LOSS_COMBINED, vblab::ErrorCode::InvalidArgument,
                 "unknown loss family");
  return static_cast<vblab::LossFamily>(f);
}

vblab::NoiseModel to_noise(const vblab_noise_model* m) {
  need(m, "noise model");
  vblab::require(m->kind >= VBLAB_NOISE_SYMMETRIC && m->kind <= VBLAB_NOISE_INSTANCE_DEPENDENT,
                 vblab::ErrorCode::InvalidArgument, "unknown noise kind");
  return vblab::NoiseModel::make(static_cast<vblab::NoiseKind>(m->kind), m->eta, m->rate_std);
}

vblab_ext_real to_c(const vblab::ExtendedReal& x) {
  return {x.is_infinite() ? 0.0 : x.value(), x.is_infinite() ? 1 : 0};
}

vblab_variation_report to_c(const vblab::VariationReport& r) {
  return {r.grad_abs_min, to_c(r.grad_abs_max), to_c(r.variation_ratio), to_c(r.normalization_c),
          r.method == vblab::RatioMethod::NumericGrid ? 1 : 0};
}

vblab_bound_report to_c(const vblab::BoundReport& r) {
  return {r.theorem == vblab::BoundTheorem::Symmetric ? VBLAB_BOUND_SYMMETRIC : VBLAB_BOUND_GENERAL,
          r.risk_gap_bound, r.c_const, r.a_const, r.variation_ratio};
}

vblab_run_summary to_c(const vblab::RunSummary& s, bool diverged) {
  return {s.best_acc, s.last_acc, s.gap, s.best_epoch, s.wall_seconds, diverged ? 1 : 0};
}

std::span<const vblab::Label> label_span(const int32_t* labels, size_t n) {
  need(labels, "labels");
  return {labels, n};
}

template <typename Writer>
void write_file(const char* path, Writer&& writer) {
  need(path, "path");
  std::ofstream out(path);
  vblab::require(static_cast<bool>(out), vblab::ErrorCode::Io, std::string("cannot write '") + path + "'");
  writer(out);
  out.flush();
  vblab::require(static_cast<bool>(out), vblab::ErrorCode::Io, std::string("write failed for '") + path + "'");
}

std::string* output_slot(vblab::OutputPaths& o, std::string_view name) {
  if (name == "metrics") return &o.metrics;
  if (name == "summary") return &o.summary;
  if (name == "reliability") return &o.reliability;
  if (name == "checkpoint") return &o.checkpoint;
  if (name == "resolved_config") return &o.resolved_config;
  return nullptr;
}

}  // namespace

extern "C" {

const char* vblab_version(void) { return "1.0.0"; }

const char* vblab_status_name(vblab_status status) {
  if (status == VBLAB_OK) return "ok";
  if (status == VBLAB_ERR_INTERNAL) return "internal";
  if (status >= VBLAB_ERR_INVALID_ARGUMENT && status <= VBLAB_ERR_DIVERGENCE) {
    return vblab::to_string(static_cast<vblab::ErrorCode>(status)).data();
  }
  return "unknown";
}

const char* vblab_last_error(void) { return g_last_error.c_str(); }

void vblab_string_free(char* str) { std::free(str); }

// ---- losses ----------------------------------------------------------------

vblab_status vblab_loss_family_parse(const char* name, vblab_loss_family* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<vblab_loss_family>(vblab::parse_loss_family(name));
  });
}

vblab_status vblab_loss_create(vblab_loss_family family, double a, vblab_loss** out) {
  return guarded([&] {
    need(out, "out");
    *out = new vblab_loss{vblab::LossSpec::single(to_family(family), a)};
  });
}

vblab_status vblab_loss_create_combined(double alpha, double beta, vblab_loss_family passive, double passive_a,
                                        vblab_loss** out) {
  return guarded([&] {
    need(out, "out");
    const auto p = vblab::LossSpec::single(to_family(passive), passive_a);
    *out = new vblab_loss{vblab::LossSpec::combined(alpha, beta, p)};
  });
}

void vblab_loss_destroy(vblab_loss* loss) { delete loss; }

vblab_status vblab_loss_describe(const vblab_loss* loss, char** out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = duplicate(loss->spec.describe());
  });
}

vblab_status vblab_loss_value(const vblab_loss* loss, const double* probs, size_t k, size_t label, double* out) {
  return guarded([&] {
    need(loss, "loss");
    need(probs, "probs");
    need(out, "out");
    *out = vblab::loss_value(loss->spec, vblab::ProbabilityVector(std::vector<double>(probs, probs + k)), label);
  });
}

vblab_status vblab_loss_grad(const vblab_loss* loss, const double* probs, size_t k, size_t label, double* grad_out) {
  return guarded([&] {
    need(loss, "loss");
    need(probs, "probs");
    need(grad_out, "grad_out");
    const auto g = vblab::loss_grad(loss->spec, vblab::ProbabilityVector(std::vector<double>(probs, probs + k)), label);
    std::copy(g.begin(), g.end(), grad_out);
  });
}

vblab_status vblab_loss_grad_curve(const vblab_loss* loss, size_t n_points, double* u_out, double* grad_abs_out) {
  return guarded([&] {
    need(loss, "loss");
    need(u_out, "u_out");
    need(grad_abs_out, "grad_abs_out");
    const auto curve = vblab::grad_magnitude_curve(loss->spec, n_points);
    for (size_t i = 0; i < curve.size(); ++i) {
      u_out[i] = curve[i].u;
      grad_abs_out[i] = curve[i].grad_abs;
    }
  });
}

vblab_status vblab_loss_write_curve_csv(const vblab_loss* loss, size_t n_points, const char* path) {
  return guarded([&] {
    need(loss, "loss");
    const auto curve = vblab::grad_magnitude_curve(loss->spec, n_points);
    write_file(path, [&](std::ostream& o) { vblab::write_curve_csv(o, curve); });
  });
}

// ---- analysis --------------------------------------------------------------

vblab_status vblab_noise_kind_parse(const char* name, vblab_noise_kind* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<vblab_noise_kind>(vblab::parse_noise_kind(name));
  });
}

vblab_status vblab_variation_ratio_closed(const vblab_loss* loss, vblab_variation_report* out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = to_c(vblab::variation_ratio_closed(loss->spec));
  });
}

vblab_status vblab_variation_ratio_numeric(const vblab_loss* loss, size_t grid_steps, vblab_variation_report* out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = to_c(vblab::variation_ratio_numeric(loss->spec, grid_steps));
  });
}

vblab_status vblab_symmetric_defect(const vblab_loss* loss, size_t k, size_t n_pairs, uint64_t seed, double* out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = vblab::symmetric_defect(loss->spec, k, n_pairs, seed);
  });
}

vblab_status vblab_bound_symmetric(const vblab_loss* loss, size_t k, double eta, vblab_bound_report* out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = to_c(vblab::excess_risk_bound_symmetric(loss->spec, k, eta));
  });
}

vblab_status vblab_bound_general(const vblab_loss* loss, const vblab_noise_model* noise, size_t k,
                                 const vblab_corruption* realized, vblab_bound_report* out) {
  return guarded([&] {
    need(loss, "loss");
    need(out, "out");
    *out = to_c(vblab::excess_risk_bound_general(loss->spec, to_noise(noise), k,
                                                 realized != nullptr ? &realized->record : nullptr));
  });
}

vblab_status vblab_asymmetry_threshold(const vblab_noise_model* noise, size_t k, const vblab_corruption* realized,
                                       vblab_ext_real* out) {
  return guarded([&] {
    need(out, "out");
    *out = to_c(vblab::asymmetry_threshold(to_noise(noise), k, realized != nullptr ? &realized->record : nullptr));
  });
}

vblab_status vblab_certify_asymmetric(const vblab_loss* loss, const double* weights, size_t k, vblab_certificate* out) {
  return guarded([&] {
    need(loss, "loss");
    need(weights, "weights");
    need(out, "out");
    *out = static_cast<vblab_certificate>(vblab::certify_asymmetric(loss->spec, {weights, k}));
  });
}

vblab_status vblab_argmin_weighted_risk(const vblab_loss* loss, const double* weights, size_t k, double resolution,
                                        double* point_out, double* value_out) {
  return guarded([&] {
    need(loss, "loss");
    need(weights, "weights");
    need(point_out, "point_out");
    const auto best = vblab::argmin_weighted_risk_bruteforce(loss->spec, {weights, k}, resolution);
    std::copy(best.point.begin(), best.point.end(), point_out);
    if (value_out != nullptr) *value_out = best.value;
  });
}

// ---- datasets --------------------------------------------------------------

vblab_status vblab_dataset_gen_blobs(size_t k, size_t per_class, size_t dim, double separation, uint64_t seed,
                                     vblab_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = new vblab_dataset{vblab::gen_gaussian_blobs(k, per_class, dim, separation, seed)};
  });
}

vblab_status vblab_dataset_load_idx(const char* images_path, const char* labels_path, vblab_dataset** out) {
  return guarded([&] {
    need(images_path, "images_path");
    need(labels_path, "labels_path");
    need(out, "out");
    *out = new vblab_dataset{vblab::load_idx_images(images_path, labels_path)};
  });
}

vblab_status vblab_dataset_load_csv(const char* path, size_t num_classes, vblab_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new vblab_dataset{vblab::load_dataset_csv(path, num_classes)};
  });
}

vblab_status vblab_dataset_save_csv(const vblab_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    write_file(path, [&](std::ostream& o) { vblab::write_dataset_csv(o, ds->data); });
  });
}

vblab_status vblab_dataset_split(const vblab_dataset* ds, double test_fraction, uint64_t seed,
                                 vblab_dataset** train_out, vblab_dataset** test_out) {
  return guarded([&] {
    need(ds, "dataset");
    need(train_out, "train_out");
    need(test_out, "test_out");
    auto [train, test] = vblab::split_train_test(ds->data, test_fraction, seed);
    auto* tr = new vblab_dataset{std::move(train)};
    try {
      *test_out = new vblab_dataset{std::move(test)};
    } catch (...) {
      delete tr;
      throw;
    }
    *train_out = tr;
  });
}

void vblab_dataset_destroy(vblab_dataset* ds) { delete ds; }
size_t vblab_dataset_size(const vblab_dataset* ds) { return ds != nullptr ? ds->data.size() : 0; }
size_t vblab_dataset_dim(const vblab_dataset* ds) { return ds != nullptr ? ds->data.dim() : 0; }
size_t vblab_dataset_num_classes(const vblab_dataset* ds) { return ds != nullptr ? ds->data.num_classes : 0; }
const int32_t* vblab_dataset_labels(const vblab_dataset* ds) { return ds != nullptr ? ds->data.labels.data() : nullptr; }
const double* vblab_dataset_features(const vblab_dataset* ds) {
  return ds != nullptr ? ds->data.features.data() : nullptr;
}

vblab_status vblab_labels_load(const char* path, vblab_labels** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new vblab_labels{vblab::load_label_file(path)};
  });
}

void vblab_labels_destroy(vblab_labels* labels) { delete labels; }
size_t vblab_labels_size(const vblab_labels* labels) { return labels != nullptr ? labels->values.size() : 0; }
const int32_t* vblab_labels_data(const vblab_labels* labels) {
  return labels != nullptr ? labels->values.data() : nullptr;
}

// ---- label noise -----------------------------------------------------------

vblab_status vblab_corrupt_labels(const vblab_noise_model* noise, const int32_t* labels, size_t n, size_t k,
                                  uint64_t seed, vblab_corruption** out) {
  return guarded([&] {
    need(out, "out");
    *out = new vblab_corruption{vblab::corrupt_labels(to_noise(noise), label_span(labels, n), k, seed)};
  });
}

vblab_status vblab_corrupt_dataset(const vblab_noise_model* noise, const vblab_dataset* ds, uint64_t seed,
                                   vblab_corruption** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = new vblab_corruption{vblab::corrupt(to_noise(noise), ds->data, seed)};
  });
}

void vblab_corruption_destroy(vblab_corruption* c) { delete c; }
size_t vblab_corruption_size(const vblab_corruption* c) { return c != nullptr ? c->record.size() : 0; }
const int32_t* vblab_corruption_noisy_labels(const vblab_corruption* c) {
  return c != nullptr ? c->record.noisy_labels.data() : nullptr;
}
const uint8_t* vblab_corruption_flip_mask(const vblab_corruption* c) {
  return c != nullptr ? c->record.flip_mask.data() : nullptr;
}
const double* vblab_corruption_realized_rates(const vblab_corruption* c) {
  return c != nullptr && !c->record.realized_rates.empty() ? c->record.realized_rates.data() : nullptr;
}
double vblab_corruption_flip_fraction(const vblab_corruption* c) {
  return c != nullptr && c->record.size() > 0 ? c->record.flip_fraction() : 0.0;
}

vblab_status vblab_corruption_write_csv(const vblab_corruption* c, const int32_t* clean_labels, const char* path) {
  return guarded([&] {
    need(c, "corruption");
    const auto clean = label_span(clean_labels, c->record.size());
    write_file(path, [&](std::ostream& o) { vblab::write_corruption_csv(o, clean, c->record); });
  });
}

vblab_status vblab_transition_matrix(const int32_t* clean, const int32_t* noisy, size_t n, size_t k,
                                     double* matrix_out) {
  return guarded([&] {
    need(matrix_out, "matrix_out");
    const auto m = vblab::empirical_transition_matrix(label_span(clean, n), label_span(noisy, n), k);
    std::copy(m.data(), m.data() + m.size(), matrix_out);
  });
}

// ---- experiments -----------------------------------------------------------

vblab_status vblab_experiment_from_json(const char* json_text, vblab_experiment** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new vblab_experiment{vblab::parse_run_config(json_text)};
  });
}

void vblab_experiment_destroy(vblab_experiment* exp) { delete exp; }

vblab_status vblab_experiment_to_json(const vblab_experiment* exp, char** out) {
  return guarded([&] {
    need(exp, "experiment");
    need(out, "out");
    *out = duplicate(vblab::dump_run_config(exp->config));
  });
}

vblab_status vblab_experiment_set(vblab_experiment* exp, const char* parameter, double value) {
  return guarded([&] {
    need(exp, "experiment");
    need(parameter, "parameter");
    auto& e = exp->config.experiment;
    const std::string_view name(parameter);
    const auto as_count = [&](const char* what) {
      vblab::require(value >= 0.0 && value == static_cast<double>(static_cast<std::uint64_t>(value)),
                     vblab::ErrorCode::InvalidArgument, std::string(what) + " must be a nonnegative integer");
      return static_cast<std::uint64_t>(value);
    };
    if (name == "seed") {
      e.seed = as_count("seed");
    } else if (name == "deterministic") {
      e.deterministic = value != 0.0;
    } else if (name == "epochs") {
      auto updated = e;
      updated.epochs = as_count("epochs");
      updated.validate();
      e = updated;
    } else if (name == "optimizer.lr") {
      auto updated = e;
      updated.optimizer.lr0 = value;
      updated.validate();
      e = updated;
    } else {
      e = vblab::with_parameter(e, name, value);
    }
  });
}

const char* vblab_experiment_output(const vblab_experiment* exp, const char* name) {
  if (exp == nullptr || name == nullptr) return nullptr;
  auto* slot = output_slot(const_cast<vblab::OutputPaths&>(exp->config.outputs), name);
  return slot != nullptr ? slot->c_str() : nullptr;
}

vblab_status vblab_experiment_set_output(vblab_experiment* exp, const char* name, const char* path) {
  return guarded([&] {
    need(exp, "experiment");
    need(name, "name");
    need(path, "path");
    auto* slot = output_slot(exp->config.outputs, name);
    vblab::require(slot != nullptr, vblab::ErrorCode::InvalidArgument, std::string("unknown output '") + name + "'");
    *slot = path;
  });
}

vblab_status vblab_run_experiment(const vblab_experiment* exp, vblab_run** out) {
  vblab_run* run = nullptr;
  const auto status = guarded([&] {
    need(exp, "experiment");
    need(out, "out");
    run = new vblab_run{vblab::run_experiment(exp->config.experiment)};
  });
  if (status != VBLAB_OK) return status;
  *out = run;
  if (run->result.diverged) {
    g_last_error = run->result.diagnostic;
    return VBLAB_ERR_DIVERGENCE;
  }
  return VBLAB_OK;
}

void vblab_run_destroy(vblab_run* run) { delete run; }

size_t vblab_run_record_count(const vblab_run* run) { return run != nullptr ? run->result.metrics.size() : 0; }

vblab_status vblab_run_record(const vblab_run* run, size_t index, vblab_metrics_record* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    vblab::require(index < run->result.metrics.size(), vblab::ErrorCode::InvalidArgument, "record index out of range");
    const auto& m = run->result.metrics[index];
    *out = {m.epoch, m.train_loss, m.test_accuracy, m.test_ece, m.lr};
  });
}

vblab_status vblab_run_summary_get(const vblab_run* run, vblab_run_summary* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = to_c(run->result.summary, run->result.diverged);
  });
}

const char* vblab_run_diagnostic(const vblab_run* run) {
  return run != nullptr ? run->result.diagnostic.c_str() : "";
}

vblab_status vblab_run_write_metrics_csv(const vblab_run* run, const char* path) {
  return guarded([&] {
    need(run, "run");
    write_file(path, [&](std::ostream& o) { vblab::write_metrics_csv(o, run->result.metrics); });
  });
}

vblab_status vblab_run_write_reliability_csv(const vblab_run* run, const char* path) {
  return guarded([&] {
    need(run, "run");
    write_file(path, [&](std::ostream& o) { vblab::write_reliability_csv(o, run->result.reliability); });
  });
}

vblab_status vblab_run_write_summary_json(const vblab_run* run, const vblab_experiment* exp, const char* path) {
  return guarded([&] {
    need(run, "run");
    need(exp, "experiment");
    write_file(path, [&](std::ostream& o) { o << vblab::summary_json(exp->config, run->result); });
  });
}

vblab_status vblab_run_save_checkpoint(const vblab_run* run, const char* path) {
  return guarded([&] {
    need(run, "run");
    need(path, "path");
    vblab::require(run->result.model.has_value(), vblab::ErrorCode::Precondition, "run has no trained model");
    vblab::save_checkpoint(*run->result.model, path);
  });
}

vblab_status vblab_sweep(const vblab_experiment* exp, const char* parameter, const double* values, size_t n_values,
                         size_t jobs, vblab_sweep_row* rows_out) {
  return guarded([&] {
    need(exp, "experiment");
    need(parameter, "parameter");
    need(values, "values");
    need(rows_out, "rows_out");
    const auto rows = vblab::sweep(exp->config.experiment, parameter, {values, n_values}, jobs);
    for (size_t i = 0; i < rows.size(); ++i) {
      rows_out[i] = {rows[i].value, rows[i].seed, to_c(rows[i].summary, rows[i].diverged)};
    }
  });
}

vblab_status vblab_sweep_write_csv(const vblab_sweep_row* rows, size_t n_rows, const char* path) {
  return guarded([&] {
    need(rows, "rows");
    std::vector<vblab::SweepRow> copy;
    for (size_t i = 0; i < n_rows; ++i) {
      vblab::RunSummary s;
      s.best_acc = rows[i].summary.best_acc;
      s.last_acc = rows[i].summary.last_acc;
      s.gap = rows[i].summary.gap;
      s.best_epoch = rows[i].summary.best_epoch;
      s.wall_seconds = rows[i].summary.wall_seconds;
      copy.push_back({rows[i].value, rows[i].seed, s, rows[i].summary.diverged != 0});
    }
    write_file(path, [&](std::ostream& o) { vblab::write_sweep_csv(o, copy); });
  });
}

}  // extern "C"

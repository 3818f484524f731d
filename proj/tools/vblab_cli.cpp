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

// vblab command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vblab/vblab.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitInternal = 1;
constexpr std::uint64_t kBuiltinSeed = 123;

// Thrown to unwind out of a subcommand with a status from the library.
struct Failure {
  vblab_status status;
  std::string message;
};

void check(vblab_status s, const std::string& context = {}) {
  if (s == VBLAB_OK) return;
  std::string msg = vblab_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{s, msg};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{VBLAB_ERR_INVALID_ARGUMENT, msg}; }

int exit_code_for(vblab_status s) {
  if (s == VBLAB_OK) return kExitOk;
  if (s == VBLAB_ERR_DIVERGENCE) return kExitDivergence;
  if (s == VBLAB_ERR_INTERNAL) return kExitInternal;
  return kExitUsage;
}

// Explicit flag > VBLAB_SEED > built-in default.
std::uint64_t default_seed() {
  const char* env = std::getenv("VBLAB_SEED");
  if (env == nullptr || *env == '\0') return kBuiltinSeed;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used, 10);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  usage(std::string("VBLAB_SEED must be a nonnegative integer, got '") + env + "'");
}

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ext_json(const vblab_ext_real& x) {
  if (x.is_infinite) return "inf";
  return x.value;
}

template <typename T, void (*Destroy)(T*)>
struct Owned {
  T* ptr = nullptr;
  Owned() = default;
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  ~Owned() { Destroy(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using LossHandle = Owned<vblab_loss, vblab_loss_destroy>;
using DatasetHandle = Owned<vblab_dataset, vblab_dataset_destroy>;
using LabelsHandle = Owned<vblab_labels, vblab_labels_destroy>;
using CorruptionHandle = Owned<vblab_corruption, vblab_corruption_destroy>;
using ExperimentHandle = Owned<vblab_experiment, vblab_experiment_destroy>;
using RunHandle = Owned<vblab_run, vblab_run_destroy>;

std::string take_string(char* s) {
  std::string out = s != nullptr ? s : "";
  vblab_string_free(s);
  return out;
}

// ---- shared option groups ---------------------------------------------------

struct LossFlags {
  std::string family = "ce";
  double a = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::string passive = "vce";

  void attach(CLI::App* cmd) {
    cmd->add_option("--loss", family, "Loss family: ce, mae, el, sl, vce, vel, vsl, nce, nce+vbl")
        ->capture_default_str();
    cmd->add_option("--a", a, "Family hyperparameter a (vce: a>=0, vel: a>1, vsl: 0<a<=1)")->capture_default_str();
    cmd->add_option("--alpha", alpha, "Weight on the normalized CE term (nce+vbl)")->capture_default_str();
    cmd->add_option("--beta", beta, "Weight on the passive term (nce+vbl)")->capture_default_str();
    cmd->add_option("--passive", passive, "Passive family for nce+vbl: vce, vel or vsl")->capture_default_str();
  }

  void build(LossHandle& loss) const {
    vblab_loss_family f{};
    check(vblab_loss_family_parse(family.c_str(), &f), "--loss");
    if (f == VBLAB_LOSS_COMBINED) {
      vblab_loss_family p{};
      check(vblab_loss_family_parse(passive.c_str(), &p), "--passive");
      check(vblab_loss_create_combined(alpha, beta, p, a, loss.out()));
    } else {
      check(vblab_loss_create(f, a, loss.out()));
    }
  }
};

struct DatasetInput {
  std::string csv;
  std::string idx_images;
  std::string idx_labels;
  std::size_t classes = 0;

  void attach(CLI::App* cmd, bool with_classes = true) {
    cmd->add_option("--dataset", csv, "Dataset CSV (f0,...,label)");
    cmd->add_option("--idx-images", idx_images, "IDX image file");
    cmd->add_option("--idx-labels", idx_labels, "IDX label file (with --idx-images)");
    if (with_classes) cmd->add_option("--classes", classes, "Number of classes for CSV input (0 = infer)");
  }

  bool given() const { return !csv.empty() || !idx_images.empty() || !idx_labels.empty(); }

  void load(DatasetHandle& ds) const {
    if (!csv.empty()) {
      if (!idx_images.empty() || !idx_labels.empty()) usage("--dataset and --idx-* are mutually exclusive");
      check(vblab_dataset_load_csv(csv.c_str(), classes, ds.out()), csv);
      return;
    }
    if (idx_images.empty() || idx_labels.empty()) usage("--idx-images and --idx-labels must be given together");
    check(vblab_dataset_load_idx(idx_images.c_str(), idx_labels.c_str(), ds.out()), idx_images);
  }
};

vblab_noise_model parse_noise(const std::string& kind, double eta, double rate_std) {
  vblab_noise_model m{};
  check(vblab_noise_kind_parse(kind.c_str(), &m.kind), "--noise");
  m.eta = eta;
  m.rate_std = rate_std;
  return m;
}

json dataset_stats(const vblab_dataset* ds) {
  const std::size_t n = vblab_dataset_size(ds);
  const std::size_t k = vblab_dataset_num_classes(ds);
  std::vector<std::size_t> counts(k, 0);
  const int32_t* labels = vblab_dataset_labels(ds);
  for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(labels[i])];
  return {{"size", n}, {"dim", vblab_dataset_dim(ds)}, {"classes", k}, {"class_counts", counts}};
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeCmd {
  LossFlags loss;
  std::string noise;
  double eta = 0.0;
  std::size_t k = 10;
  double rate_std = 0.1;
  std::string curve;
  std::size_t curve_points = 1000;
  bool numeric = false;
  std::size_t grid_steps = 100000;
  DatasetInput data;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    loss.attach(cmd);
    cmd->add_option("--noise", noise, "Noise model for bounds: symmetric, asymmetric (circular), instance");
    cmd->add_option("--eta", eta, "Noise rate")->capture_default_str();
    cmd->add_option("--k", k, "Number of classes")->capture_default_str();
    cmd->add_option("--rate-std", rate_std, "Spread of per-instance flip rates (instance noise)")
        ->capture_default_str();
    cmd->add_option("--curve", curve, "Write |dL/du| over (0,1) to this CSV");
    cmd->add_option("--curve-points", curve_points, "Samples in the gradient curve")->capture_default_str();
    cmd->add_flag("--numeric", numeric, "Also estimate the ratio on a dense grid");
    cmd->add_option("--grid-steps", grid_steps, "Grid size for --numeric")->capture_default_str();
    data.attach(cmd, false);
    cmd->add_option("--seed", seed, "Seed for realizing instance noise (default VBLAB_SEED or 123)");
  }

  int run() {
    LossHandle l;
    loss.build(l);
    json out;
    out["loss"] = take_string([&] {
      char* s = nullptr;
      check(vblab_loss_describe(l.get(), &s));
      return s;
    }());

    if (!curve.empty()) check(vblab_loss_write_curve_csv(l.get(), curve_points, curve.c_str()), curve);

    vblab_variation_report rep{};
    check(vblab_variation_ratio_closed(l.get(), &rep));
    out["grad_abs_min"] = rep.grad_abs_min;
    out["grad_abs_max"] = ext_json(rep.grad_abs_max);
    out["variation_ratio"] = ext_json(rep.variation_ratio);
    out["normalization_c"] = ext_json(rep.normalization_c);
    out["method"] = "closed_form";
    if (numeric) {
      vblab_variation_report num{};
      check(vblab_variation_ratio_numeric(l.get(), grid_steps, &num));
      out["numeric"] = {{"grad_abs_min", num.grad_abs_min},
                        {"grad_abs_max", ext_json(num.grad_abs_max)},
                        {"variation_ratio", ext_json(num.variation_ratio)},
                        {"grid_steps", grid_steps}};
    }

    if (!noise.empty()) {
      const auto model = parse_noise(noise, eta, rate_std);
      CorruptionHandle realized;
      DatasetHandle ds;
      if (model.kind == VBLAB_NOISE_INSTANCE_DEPENDENT) {
        if (!data.given()) usage("instance noise needs features to realize per-sample rates: pass --dataset or --idx-*");
        data.load(ds);
        k = vblab_dataset_num_classes(ds.get());
        check(vblab_corrupt_dataset(&model, ds.get(), seed.value_or(default_seed()), realized.out()));
      }
      out["noise"] = {{"kind", noise}, {"eta", eta}, {"k", k}};
      const bool bounded = !rep.variation_ratio.is_infinite;
      json bounds = json::array();
      if (model.kind == VBLAB_NOISE_SYMMETRIC) bounds.push_back(symmetric_bound(l.get(), bounded));
      bounds.push_back(general_bound(l.get(), model, realized.get(), bounded));
      out["bounds"] = bounds;

      vblab_ext_real threshold{};
      check(vblab_asymmetry_threshold(&model, k, realized.get(), &threshold));
      out["asymmetry_threshold"] = ext_json(threshold);
      // Two weights whose top ratio is the threshold reproduce the certificate.
      const double weights[2] = {threshold.is_infinite ? 1.0 : threshold.value, threshold.is_infinite ? 0.0 : 1.0};
      vblab_certificate cert{};
      check(vblab_certify_asymmetric(l.get(), weights, 2, &cert));
      out["certificate"] = cert == VBLAB_CERT_BY_RATIO        ? "certified_by_ratio"
                           : cert == VBLAB_CERT_BY_CONCAVITY ? "certified_by_concavity"
                                                             : "not_certified";
      out["certified"] = cert != VBLAB_CERT_NONE;
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }

  json symmetric_bound(const vblab_loss* l, bool bounded) const {
    json b = {{"theorem", "symmetric"}};
    if (!bounded) {
      b["risk_gap_bound"] = "inf";
      return b;
    }
    vblab_bound_report r{};
    const auto s = vblab_bound_symmetric(l, k, eta, &r);
    if (s == VBLAB_ERR_PRECONDITION) {
      b["error"] = vblab_last_error();
      return b;
    }
    check(s);
    b["risk_gap_bound"] = r.risk_gap_bound;
    b["c"] = r.c_const;
    return b;
  }

  json general_bound(const vblab_loss* l, const vblab_noise_model& m, const vblab_corruption* realized,
                     bool bounded) const {
    json b = {{"theorem", "general"}};
    if (!bounded) {
      b["risk_gap_bound"] = "inf";
      return b;
    }
    vblab_bound_report r{};
    const auto s = vblab_bound_general(l, &m, k, realized, &r);
    if (s == VBLAB_ERR_NOT_CLEAN_DOMINANT) {
      b["error"] = vblab_last_error();
      return b;
    }
    check(s);
    b["risk_gap_bound"] = r.risk_gap_bound;
    b["c"] = r.c_const;
    b["a"] = r.a_const;
    return b;
  }
};

// ---- corrupt ----------------------------------------------------------------

struct CorruptCmd {
  std::string kind = "symmetric";
  double eta = 0.0;
  double rate_std = 0.1;
  std::size_t k = 0;
  std::optional<std::uint64_t> seed;
  std::string labels;
  DatasetInput data;
  std::string out;
  bool stats = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "symmetric, asymmetric (circular) or instance")->capture_default_str();
    cmd->add_option("--eta", eta, "Noise rate")->required();
    cmd->add_option("--rate-std", rate_std, "Spread of per-instance flip rates (instance noise)")
        ->capture_default_str();
    cmd->add_option("--k", k, "Number of classes (default: inferred from the input)");
    cmd->add_option("--seed", seed, "Seed (default VBLAB_SEED or 123)");
    cmd->add_option("--labels", labels, "Label file: IDX labels, dataset CSV or one label per line");
    data.attach(cmd, false);
    cmd->add_option("--out", out, "Write index,clean_label,noisy_label,flipped[,realized_rate] CSV here");
    cmd->add_flag("--stats", stats, "Include the empirical transition matrix in the printed report");
  }

  int run() {
    const auto model = parse_noise(kind, eta, rate_std);
    const std::uint64_t s = seed.value_or(default_seed());
    CorruptionHandle c;
    LabelsHandle lab;
    DatasetHandle ds;
    std::vector<int32_t> clean;
    std::size_t classes = k;
    if (!labels.empty()) {
      if (data.given()) usage("--labels cannot be combined with --dataset or --idx-*");
      if (model.kind == VBLAB_NOISE_INSTANCE_DEPENDENT) usage("instance noise needs features: use --dataset or --idx-*");
      check(vblab_labels_load(labels.c_str(), lab.out()), labels);
      const int32_t* p = vblab_labels_data(lab.get());
      clean.assign(p, p + vblab_labels_size(lab.get()));
      if (classes == 0) {
        for (auto y : clean) classes = std::max<std::size_t>(classes, static_cast<std::size_t>(y) + 1);
        classes = std::max<std::size_t>(classes, 2);
      }
      check(vblab_corrupt_labels(&model, clean.data(), clean.size(), classes, s, c.out()));
    } else if (data.given()) {
      data.classes = k;
      data.load(ds);
      classes = vblab_dataset_num_classes(ds.get());
      const int32_t* p = vblab_dataset_labels(ds.get());
      clean.assign(p, p + vblab_dataset_size(ds.get()));
      check(vblab_corrupt_dataset(&model, ds.get(), s, c.out()));
    } else {
      usage("no input: pass --labels, --dataset or --idx-images/--idx-labels");
    }

    if (!out.empty()) check(vblab_corruption_write_csv(c.get(), clean.data(), out.c_str()), out);

    json report = {{"kind", kind},        {"eta", eta},
                   {"classes", classes},  {"seed", s},
                   {"size", clean.size()}, {"flip_fraction", vblab_corruption_flip_fraction(c.get())}};
    if (stats) {
      std::vector<double> m(classes * classes);
      check(vblab_transition_matrix(clean.data(), vblab_corruption_noisy_labels(c.get()), clean.size(), classes,
                                    m.data()));
      json rows = json::array();
      for (std::size_t i = 0; i < classes; ++i) {
        rows.push_back(std::vector<double>(m.begin() + static_cast<std::ptrdiff_t>(i * classes),
                                           m.begin() + static_cast<std::ptrdiff_t>((i + 1) * classes)));
      }
      report["transition_matrix"] = rows;
    }
    std::cout << report.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- dataset ----------------------------------------------------------------

struct DatasetGenCmd {
  std::size_t k = 10;
  std::size_t per_class = 1000;
  std::size_t dim = 20;
  double separation = 8.0;
  std::optional<std::uint64_t> seed;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "Number of classes")->capture_default_str();
    cmd->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
    cmd->add_option("--dim", dim, "Feature dimension")->capture_default_str();
    cmd->add_option("--separation", separation, "Scale of the class means")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed (default VBLAB_SEED or 123)");
    cmd->add_option("--out", out, "Output dataset CSV")->required();
  }

  int run() {
    DatasetHandle ds;
    check(vblab_dataset_gen_blobs(k, per_class, dim, separation, seed.value_or(default_seed()), ds.out()));
    check(vblab_dataset_save_csv(ds.get(), out.c_str()), out);
    std::cout << dataset_stats(ds.get()).dump(2) << '\n';
    return kExitOk;
  }
};

struct DatasetLoadCmd {
  DatasetInput data;
  std::string out;

  void attach(CLI::App* cmd) {
    data.attach(cmd);
    cmd->add_option("--out", out, "Re-export the dataset as CSV");
  }

  int run() {
    if (!data.given()) usage("no input: pass --dataset or --idx-images/--idx-labels");
    DatasetHandle ds;
    data.load(ds);
    if (!out.empty()) check(vblab_dataset_save_csv(ds.get(), out.c_str()), out);
    std::cout << dataset_stats(ds.get()).dump(2) << '\n';
    return kExitOk;
  }
};

struct DatasetSplitCmd {
  DatasetInput data;
  double test_fraction = 0.2;
  std::optional<std::uint64_t> seed;
  std::string train_out;
  std::string test_out;

  void attach(CLI::App* cmd) {
    data.attach(cmd);
    cmd->add_option("--test-fraction", test_fraction, "Share of each class held out")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed (default VBLAB_SEED or 123)");
    cmd->add_option("--train-out", train_out, "Training split CSV")->required();
    cmd->add_option("--test-out", test_out, "Test split CSV")->required();
  }

  int run() {
    if (!data.given()) usage("no input: pass --dataset or --idx-images/--idx-labels");
    DatasetHandle ds;
    data.load(ds);
    DatasetHandle train;
    DatasetHandle test;
    check(vblab_dataset_split(ds.get(), test_fraction, seed.value_or(default_seed()), train.out(), test.out()));
    check(vblab_dataset_save_csv(train.get(), train_out.c_str()), train_out);
    check(vblab_dataset_save_csv(test.get(), test_out.c_str()), test_out);
    std::cout << json{{"train", dataset_stats(train.get())}, {"test", dataset_stats(test.get())}}.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- train / sweep ----------------------------------------------------------

// Loads a config file, applies the seed precedence, and fills unset outputs
// with defaults under out_dir.
void load_experiment(const std::string& path, std::optional<std::uint64_t> seed_flag, ExperimentHandle& exp) {
  const std::string text = read_text(path, "config file");
  check(vblab_experiment_from_json(text.c_str(), exp.out()), path);
  bool config_has_seed = false;
  try {
    config_has_seed = json::parse(text).contains("seed");
  } catch (const json::exception&) {
  }
  if (seed_flag) {
    check(vblab_experiment_set(exp.get(), "seed", static_cast<double>(*seed_flag)), "--seed");
  } else if (!config_has_seed) {
    check(vblab_experiment_set(exp.get(), "seed", static_cast<double>(default_seed())), "VBLAB_SEED");
  }
}

std::string joined(const std::string& dir, const char* name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void default_output(vblab_experiment* exp, const char* slot, const std::string& dir, const char* file) {
  const char* cur = vblab_experiment_output(exp, slot);
  if (cur == nullptr || *cur == '\0') check(vblab_experiment_set_output(exp, slot, joined(dir, file).c_str()));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) usage("cannot write '" + path + "'");
  out << text;
}

struct TrainCmd {
  std::string config;
  std::string out_dir = ".";
  bool deterministic = false;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Run configuration JSON (version 1)")->required();
    cmd->add_option("--out-dir", out_dir, "Directory for outputs the config leaves unset")->capture_default_str();
    cmd->add_flag("--deterministic", deterministic, "Force deterministic mode");
    cmd->add_option("--seed", seed, "Override the run seed");
  }

  int run() {
    ExperimentHandle exp;
    load_experiment(config, seed, exp);
    if (deterministic) {
      // Deterministic mode is the library default; the flag only pins it
      // against configs that turned it off.
      check(vblab_experiment_set(exp.get(), "deterministic", 1.0), "--deterministic");
    }
    default_output(exp.get(), "metrics", out_dir, "metrics.csv");
    default_output(exp.get(), "summary", out_dir, "summary.json");
    default_output(exp.get(), "reliability", out_dir, "reliability.csv");
    default_output(exp.get(), "resolved_config", out_dir, "resolved_config.json");

    const std::string resolved = take_string([&] {
      char* s = nullptr;
      check(vblab_experiment_to_json(exp.get(), &s));
      return s;
    }());
    write_text(vblab_experiment_output(exp.get(), "resolved_config"), resolved + "\n");

    RunHandle run;
    const auto status = vblab_run_experiment(exp.get(), run.out());
    if (status != VBLAB_OK && status != VBLAB_ERR_DIVERGENCE) check(status);
    const std::string diagnostic = status == VBLAB_ERR_DIVERGENCE ? vblab_last_error() : "";

    check(vblab_run_write_metrics_csv(run.get(), vblab_experiment_output(exp.get(), "metrics")));
    check(vblab_run_write_summary_json(run.get(), exp.get(), vblab_experiment_output(exp.get(), "summary")));
    if (status == VBLAB_OK) {
      check(vblab_run_write_reliability_csv(run.get(), vblab_experiment_output(exp.get(), "reliability")));
      const char* ckpt = vblab_experiment_output(exp.get(), "checkpoint");
      if (ckpt != nullptr && *ckpt != '\0') check(vblab_run_save_checkpoint(run.get(), ckpt), ckpt);
    }

    vblab_run_summary s{};
    check(vblab_run_summary_get(run.get(), &s));
    std::cout << json{{"best_acc", s.best_acc},
                      {"last_acc", s.last_acc},
                      {"gap", s.gap},
                      {"best_epoch", s.best_epoch},
                      {"wall_clock_seconds", s.wall_seconds},
                      {"diverged", s.diverged != 0}}
                     .dump(2)
              << '\n';
    if (status == VBLAB_ERR_DIVERGENCE) {
      std::cerr << "vblab: training diverged: " << diagnostic << '\n';
      return kExitDivergence;
    }
    return kExitOk;
  }
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage("--values: '" + item + "' is not a number");
    }
  }
  if (values.empty()) usage("--values must list at least one number");
  return values;
}

struct SweepCmd {
  std::string config;
  std::string param;
  std::string values;
  std::string out = "sweep.csv";
  std::optional<std::uint64_t> seed;
  const std::size_t* jobs = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Base run configuration JSON (version 1)")->required();
    cmd->add_option("--param", param, "Parameter to vary: loss.a, loss.alpha, loss.beta or noise.eta")->required();
    cmd->add_option("--values", values, "Comma-separated values, e.g. 0.5,1,2,4")->required();
    cmd->add_option("--out", out, "Sweep CSV (value,seed,best_acc,last_acc,gap,diverged)")->capture_default_str();
    cmd->add_option("--seed", seed, "Override the base seed");
  }

  int run() {
    ExperimentHandle exp;
    load_experiment(config, seed, exp);
    const auto vals = parse_values(values);
    std::vector<vblab_sweep_row> rows(vals.size());
    check(vblab_sweep(exp.get(), param.c_str(), vals.data(), vals.size(), *jobs, rows.data()), "--param " + param);
    check(vblab_sweep_write_csv(rows.data(), rows.size(), out.c_str()), out);
    json report = json::array();
    bool any_diverged = false;
    for (const auto& r : rows) {
      report.push_back({{"value", r.value},
                        {"seed", r.seed},
                        {"best_acc", r.summary.best_acc},
                        {"last_acc", r.summary.last_acc},
                        {"gap", r.summary.gap},
                        {"diverged", r.summary.diverged != 0}});
      any_diverged = any_diverged || r.summary.diverged != 0;
    }
    std::cout << report.dump(2) << '\n';
    if (any_diverged) {
      std::cerr << "vblab: at least one sweep point diverged\n";
      return kExitDivergence;
    }
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vblab: variation-bounded losses for learning with noisy labels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vblab_version()));
  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "Maximum worker threads for any subcommand")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.fallthrough();

  AnalyzeCmd analyze;
  analyze.attach(app.add_subcommand("analyze", "Variation ratio, bounds and asymmetry certificate as JSON"));
  CorruptCmd corrupt;
  corrupt.attach(app.add_subcommand("corrupt", "Inject label noise and write a corruption file"));

  auto* dataset = app.add_subcommand("dataset", "Generate, inspect or split datasets");
  dataset->require_subcommand(1);
  DatasetGenCmd gen;
  gen.attach(dataset->add_subcommand("gen", "Generate Gaussian blobs"));
  DatasetLoadCmd load;
  load.attach(dataset->add_subcommand("load", "Load IDX or CSV data and print class counts"));
  DatasetSplitCmd split;
  split.attach(dataset->add_subcommand("split", "Stratified train/test split"));

  TrainCmd train;
  train.attach(app.add_subcommand("train", "Train an MLP from a run configuration"));
  SweepCmd sweep;
  sweep.jobs = &jobs;
  sweep.attach(app.add_subcommand("sweep", "Train once per value of one hyperparameter"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("analyze")) return analyze.run();
    if (app.got_subcommand("corrupt")) return corrupt.run();
    if (dataset->got_subcommand("gen")) return gen.run();
    if (dataset->got_subcommand("load")) return load.run();
    if (dataset->got_subcommand("split")) return split.run();
    if (app.got_subcommand("train")) return train.run();
    if (app.got_subcommand("sweep")) return sweep.run();
  } catch (const Failure& f) {
    std::cerr << "vblab: " << f.message << '\n';
    return exit_code_for(f.status);
  }
  return kExitUsage;
}

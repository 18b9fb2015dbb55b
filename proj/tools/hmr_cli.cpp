// hmr: command-line front end over the C API in libhmr.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmr/hmr.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int code;
  std::string message;
};

int exit_code(hmr_status status) {
  switch (status) {
    case HMR_OK:
      return 0;
    case HMR_ERR_INVALID_ARGUMENT:
    case HMR_ERR_STATE:
      return kExitUsage;
    case HMR_ERR_DATA:
    case HMR_ERR_IO:
      return kExitData;
    case HMR_ERR_NUMERIC:
    case HMR_ERR_INTERNAL:
      return kExitNumeric;
  }
  return kExitNumeric;
}

void check(hmr_status status) {
  if (status != HMR_OK) throw Failure{exit_code(status), hmr_last_error()};
}

struct DatasetDeleter {
  void operator()(hmr_dataset* p) const { hmr_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(hmr_model* p) const { hmr_model_free(p); }
};
struct ReportDeleter {
  void operator()(hmr_report* p) const { hmr_report_free(p); }
};
struct TextDeleter {
  void operator()(hmr_text* p) const { hmr_text_free(p); }
};
using Dataset = std::unique_ptr<hmr_dataset, DatasetDeleter>;
using Model = std::unique_ptr<hmr_model, ModelDeleter>;
using Text = std::unique_ptr<hmr_text, TextDeleter>;
using Report = std::unique_ptr<hmr_report, ReportDeleter>;

std::string number(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join(const std::vector<double>& items) {
  std::vector<std::string> parts;
  for (double v : items) parts.push_back(number(v));
  return join(parts);
}

void write_file(const std::string& path, const char* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitData, "cannot open '" + path + "' for writing"};
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) throw Failure{kExitData, "failed writing '" + path + "'"};
}

void emit(const Text& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fwrite(hmr_text_data(text.get()), 1, hmr_text_size(text.get()), stdout);
  } else {
    write_file(path, hmr_text_data(text.get()), hmr_text_size(text.get()));
  }
}

Dataset load(const std::string& path, bool carry_forward) {
  hmr_dataset* raw = nullptr;
  check(hmr_dataset_load(path.c_str(), carry_forward ? 1 : 0, &raw));
  return Dataset(raw);
}

Model load_model(const std::string& path) {
  hmr_model* raw = nullptr;
  check(hmr_model_load(path.c_str(), &raw));
  return Model(raw);
}

// Options shared by every command that builds a supervised task.
struct TaskFlags {
  std::string data;
  bool carry_forward = false;
  std::string target = "mAb";
  std::vector<std::string> features;
  int horizon = 1;
  bool direct = false;

  std::vector<const char*> feature_ptrs;

  void add(CLI::App* cmd) {
    cmd->add_option("-d,--data", data, "Culture CSV file")->required();
    cmd->add_flag("--carry-forward", carry_forward, "Fill missing cells from the previous day");
    cmd->add_option("--target", target, "Parameter to forecast")->capture_default_str();
    cmd->add_option("--features", features, "Comma-separated input parameters (default: all)")->delimiter(',');
    cmd->add_option("--horizon", horizon, "Days ahead (1 or 2)")->check(CLI::IsMember({1, 2}))->capture_default_str();
    cmd->add_flag("--direct", direct, "Horizon 2 without the appended target(t+1) input");
  }

  hmr_task task() {
    feature_ptrs.clear();
    for (const auto& f : features) feature_ptrs.push_back(f.c_str());
    return hmr_task{target.c_str(), feature_ptrs.empty() ? nullptr : feature_ptrs.data(), feature_ptrs.size(),
                    horizon, direct ? 0 : 1};
  }

  void describe(std::vector<std::pair<std::string, std::string>>& config) const {
    config.emplace_back("data", data);
    config.emplace_back("target", target);
    config.emplace_back("features", features.empty() ? "all" : join(features));
    config.emplace_back("horizon", std::to_string(horizon));
    config.emplace_back("intermediate_input", horizon == 2 && !direct ? "yes" : "no");
  }
};

struct FitFlags {
  hmr_fit_options fit = hmr_fit_options_default();

  void add(CLI::App* cmd) {
    cmd->add_option("--theta", fit.theta, "Expansion coefficient")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--top-k", fit.top_k, "Winner boxes tested before creating a new one")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--expansion-fraction", fit.expansion_fraction, "Fraction of dimensions that must pass")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--lambda", fit.lambda, "Membership sensitivity")->check(CLI::PositiveNumber)->capture_default_str();
  }

  void describe(std::vector<std::pair<std::string, std::string>>& config, bool with_theta = true) const {
    if (with_theta) config.emplace_back("theta", number(fit.theta));
    config.emplace_back("top_k", std::to_string(fit.top_k));
    config.emplace_back("expansion_fraction", number(fit.expansion_fraction));
    config.emplace_back("lambda", number(fit.lambda));
  }
};

struct ExperimentFlags {
  hmr_experiment_options options = hmr_experiment_options_default();
  std::vector<double> grid;
  bool json = false;
  bool timings = false;
  std::string output;
  std::string table;

  void add(CLI::App* cmd, bool with_grid) {
    cmd->add_option("--folds", options.folds, "Outer folds")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd->add_option("--inner-folds", options.inner_folds, "Inner folds")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd->add_option("--seed", options.seed, "Fold shuffle seed")->capture_default_str();
    cmd->add_option("--jobs", options.jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
    if (with_grid) {
      cmd->add_option("--grid", grid, "Comma-separated theta grid (default 0.1..0.7)")
          ->delimiter(',')
          ->check(CLI::Range(0.0, 1.0));
    }
    cmd->add_flag("--json", json, "Machine-readable report");
    cmd->add_flag("--timings", timings, "Include wall-clock columns");
    cmd->add_option("-o,--output", output, "Report path (default stdout)");
    cmd->add_option("--table", table, "Also write the flat CSV table here");
  }

  std::vector<double> resolved_grid() const {
    return grid.empty() ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7} : grid;
  }
};

using Runner = hmr_status (*)(const hmr_dataset*, const hmr_task*, const hmr_fit_options*,
                              const hmr_experiment_options*, hmr_report**);

void run_experiment(Runner runner, TaskFlags& task_flags, FitFlags& fit_flags, ExperimentFlags& flags,
                    std::vector<std::pair<std::string, std::string>> config) {
  const Dataset data = load(task_flags.data, task_flags.carry_forward);
  const hmr_task task = task_flags.task();
  config.emplace_back("folds", std::to_string(flags.options.folds));
  config.emplace_back("inner_folds", std::to_string(flags.options.inner_folds));
  config.emplace_back("seed", std::to_string(flags.options.seed));

  std::vector<const char*> keys, values;
  for (const auto& [k, v] : config) {
    keys.push_back(k.c_str());
    values.push_back(v.c_str());
  }
  const std::vector<double> grid = flags.resolved_grid();
  hmr_experiment_options options = flags.options;
  options.grid = grid.data();
  options.grid_size = grid.size();
  options.include_timings = flags.timings ? 1 : 0;
  options.config_keys = keys.data();
  options.config_values = values.data();
  options.config_count = keys.size();

  hmr_report* raw_report = nullptr;
  check(runner(data.get(), &task, &fit_flags.fit, &options, &raw_report));
  const Report report(raw_report);

  hmr_text* raw = nullptr;
  check(hmr_report_render(report.get(), flags.json ? HMR_FORMAT_JSON : HMR_FORMAT_TEXT, &raw));
  emit(Text(raw), flags.output);
  if (!flags.table.empty()) {
    check(hmr_report_render(report.get(), HMR_FORMAT_TABLE, &raw));
    emit(Text(raw), flags.table);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbox mixture regression: synthesis, training, tuning, cross-validation and forecasting"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic culture dataset");
  hmr_synth_options synth_options = hmr_synth_options_default();
  std::string synth_kind = "bioprocess";
  std::string synth_output;
  synth->add_option("--cultures", synth_options.cultures, "Number of cultures")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--days", synth_options.days, "Days per culture")->check(CLI::Range(3, 100000))->capture_default_str();
  synth->add_option("--noise", synth_options.noise, "Relative noise level")->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--seed", synth_options.seed, "Generator seed")->capture_default_str();
  synth->add_option("--kind", synth_kind, "bioprocess or benchmark")
      ->check(CLI::IsMember({"bioprocess", "benchmark"}))
      ->capture_default_str();
  synth->add_option("-o,--output", synth_output, "Output CSV path")->required();

  // train
  auto* train = app.add_subcommand("train", "Fit a model and write it to a file");
  TaskFlags train_task;
  FitFlags train_fit;
  std::string model_output;
  bool train_json = false;
  std::uint64_t train_seed = 1;
  train_task.add(train);
  train_fit.add(train);
  train->add_option("-o,--output", model_output, "Model file path")->required();
  train->add_option("--seed", train_seed, "Recorded for provenance; training itself is deterministic")->capture_default_str();
  train->add_flag("--json", train_json, "Machine-readable metrics");

  // cv
  auto* cv = app.add_subcommand("cv", "Culture-grouped k-fold cross-validation");
  TaskFlags cv_task;
  FitFlags cv_fit;
  ExperimentFlags cv_flags;
  bool cv_tune = false;
  cv_task.add(cv);
  cv_fit.add(cv);
  cv_flags.add(cv, true);
  cv->add_flag("--tune", cv_tune, "Pick theta per training fold by inner cross-validation");

  // tune
  auto* tune = app.add_subcommand("tune", "Grid-search theta by grouped cross-validation");
  TaskFlags tune_task;
  FitFlags tune_fit;
  ExperimentFlags tune_flags;
  tune_task.add(tune);
  tune_fit.add(tune);
  tune_flags.add(tune, true);

  // featsel
  auto* featsel = app.add_subcommand("featsel", "Correlation-ordered forward feature selection with consensus");
  TaskFlags fs_task;
  FitFlags fs_fit;
  ExperimentFlags fs_flags;
  fs_task.add(featsel);
  fs_fit.add(featsel);
  fs_flags.add(featsel, false);
  featsel->add_option("--min-folds", fs_flags.options.min_folds, "Consensus threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // predict
  auto* predict = app.add_subcommand("predict", "Forecast with one model (horizon 1) or a chained pair (horizon 2)");
  std::string predict_data, model_path, model2_path, predict_output;
  bool predict_carry = false;
  int predict_horizon = 1;
  predict->add_option("-d,--data", predict_data, "Culture CSV file")->required();
  predict->add_option("-m,--model", model_path, "Horizon-1 model")->required();
  predict->add_option("--model2", model2_path, "Horizon-2 model fed with the first model's output");
  predict->add_option("--horizon", predict_horizon, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  predict->add_flag("--carry-forward", predict_carry, "Fill missing cells from the previous day");
  predict->add_option("-o,--output", predict_output, "Predictions CSV (default stdout)");

  // window
  auto* win = app.add_subcommand("window", "Export the supervised design for a task as CSV");
  TaskFlags win_task;
  std::string win_output;
  win_task.add(win);
  win->add_option("-o,--output", win_output, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      synth_options.kind = synth_kind == "benchmark" ? HMR_DATASET_BENCHMARK : HMR_DATASET_BIOPROCESS;
      hmr_dataset* raw = nullptr;
      check(hmr_dataset_synthesize(&synth_options, &raw));
      const Dataset data(raw);
      check(hmr_dataset_save(data.get(), synth_output.c_str()));
      std::cout << "wrote " << hmr_dataset_culture_count(data.get()) << " cultures, "
                << hmr_dataset_day_count(data.get()) << " rows (kind " << synth_kind << ", seed "
                << synth_options.seed << ") to " << synth_output << '\n';
    } else if (train->parsed()) {
      const Dataset data = load(train_task.data, train_task.carry_forward);
      const hmr_task task = train_task.task();
      hmr_model* raw = nullptr;
      hmr_train_metrics metrics{};
      check(hmr_model_train(data.get(), &task, &train_fit.fit, &raw, &metrics));
      const Model model(raw);
      check(hmr_model_save(model.get(), model_output.c_str()));
      if (train_json) {
        const nlohmann::ordered_json doc = {{"command", "train"},
                                            {"model", model_output},
                                            {"seed", train_seed},
                                            {"theta", train_fit.fit.theta},
                                            {"top_k", train_fit.fit.top_k},
                                            {"lambda", train_fit.fit.lambda},
                                            {"train_rmse", metrics.train_rmse},
                                            {"boxes", metrics.boxes},
                                            {"rows", metrics.rows},
                                            {"features", metrics.features},
                                            {"seconds", metrics.seconds}};
        std::cout << doc.dump() << '\n';
      } else {
        std::cout << "model      " << model_output << '\n'
                  << "seed       " << train_seed << '\n'
                  << "theta      " << train_fit.fit.theta << '\n'
                  << "rows       " << metrics.rows << '\n'
                  << "features   " << metrics.features << '\n'
                  << "boxes      " << metrics.boxes << '\n'
                  << "train_rmse " << number(metrics.train_rmse) << '\n'
                  << "seconds    " << metrics.seconds << '\n';
      }
    } else if (cv->parsed()) {
      cv_flags.options.tune = cv_tune ? 1 : 0;
      std::vector<std::pair<std::string, std::string>> config;
      cv_task.describe(config);
      cv_fit.describe(config, !cv_tune);
      if (cv_tune) config.emplace_back("grid", join(cv_flags.resolved_grid()));
      run_experiment(hmr_cross_validate, cv_task, cv_fit, cv_flags, std::move(config));
    } else if (tune->parsed()) {
      std::vector<std::pair<std::string, std::string>> config;
      tune_task.describe(config);
      tune_fit.describe(config, false);
      config.emplace_back("grid", join(tune_flags.resolved_grid()));
      run_experiment(hmr_tune, tune_task, tune_fit, tune_flags, std::move(config));
    } else if (featsel->parsed()) {
      std::vector<std::pair<std::string, std::string>> config;
      fs_task.describe(config);
      fs_fit.describe(config);
      config.emplace_back("min_folds", std::to_string(fs_flags.options.min_folds));
      run_experiment(hmr_select_features, fs_task, fs_fit, fs_flags, std::move(config));
    } else if (predict->parsed()) {
      if (predict_horizon == 2 && model2_path.empty()) {
        throw Failure{kExitUsage, "--horizon 2 requires --model2"};
      }
      if (predict_horizon == 1 && !model2_path.empty()) {
        throw Failure{kExitUsage, "--model2 is only used with --horizon 2"};
      }
      const Dataset data = load(predict_data, predict_carry);
      const Model first = load_model(model_path);
      Model second;
      if (predict_horizon == 2) second = load_model(model2_path);
      hmr_text* raw = nullptr;
      std::size_t rows = 0;
      check(hmr_predict_dataset(first.get(), second.get(), data.get(), &raw, &rows));
      emit(Text(raw), predict_output);
      if (!predict_output.empty()) std::cerr << "wrote " << rows << " predictions to " << predict_output << '\n';
    } else if (win->parsed()) {
      const Dataset data = load(win_task.data, win_task.carry_forward);
      const hmr_task task = win_task.task();
      hmr_text* raw = nullptr;
      std::size_t rows = 0;
      check(hmr_dataset_window(data.get(), &task, &raw, &rows));
      emit(Text(raw), win_output);
    }
  } catch (const Failure& f) {
    std::cerr << "hmr: " << f.message << '\n';
    return f.code;
  }
  return 0;
}

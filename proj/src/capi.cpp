#include "hmr/hmr.h"

#include <chrono>
#include <new>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "format.hpp"
#include "hmr/data.hpp"
#include "hmr/error.hpp"
#include "hmr/regressor.hpp"
#include "hmr/report.hpp"
#include "hmr/selection.hpp"

struct hmr_dataset {
  hmr::CultureDataset data;
};

struct hmr_model {
  hmr::HmrModel model;
};

struct hmr_text {
  std::string value;
};

struct hmr_report {
  std::variant<hmr::CvReport, hmr::TunedCvReport, hmr::GridResult, hmr::FeatselReport> result;
  hmr::ReportContext context;
};

namespace {

thread_local std::string last_error;

template <typename Body>
hmr_status guarded(Body&& body) {
  try {
    body();
    return HMR_OK;
  } catch (const hmr::InvalidArgument& e) {
    last_error = e.what();
    return HMR_ERR_INVALID_ARGUMENT;
  } catch (const hmr::DataError& e) {
    last_error = e.what();
    return HMR_ERR_DATA;
  } catch (const hmr::IoError& e) {
    last_error = e.what();
    return HMR_ERR_IO;
  } catch (const hmr::NumericError& e) {
    last_error = e.what();
    return HMR_ERR_NUMERIC;
  } catch (const hmr::StateError& e) {
    last_error = e.what();
    return HMR_ERR_STATE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HMR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HMR_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return HMR_ERR_INTERNAL;
  }
}

template <typename T>
const T& deref(const T* p, const char* what) {
  if (p == nullptr) throw hmr::InvalidArgument(std::string(what) + " is NULL");
  return *p;
}

template <typename T>
void require_out(T** out) {
  if (out == nullptr) throw hmr::InvalidArgument("output pointer is NULL");
  *out = nullptr;
}

hmr::WindowSpec to_spec(const hmr::CultureDataset& data, const hmr_task& task) {
  if (task.target == nullptr) throw hmr::InvalidArgument("task target is NULL");
  hmr::WindowSpec spec;
  spec.target = task.target;
  spec.horizon = task.horizon;
  spec.include_intermediate = task.include_intermediate != 0;
  if (task.features == nullptr || task.feature_count == 0) {
    spec.features = data.parameters;
  } else {
    for (std::size_t i = 0; i < task.feature_count; ++i) {
      if (task.features[i] == nullptr) throw hmr::InvalidArgument("task feature name is NULL");
      spec.features.emplace_back(task.features[i]);
    }
  }
  return spec;
}

hmr::ClusterConfig to_config(const hmr_fit_options& fit) {
  hmr::ClusterConfig config;
  config.theta = fit.theta;
  config.top_k = fit.top_k;
  config.expansion_fraction = fit.expansion_fraction;
  config.validate();
  if (!(fit.lambda > 0.0)) throw hmr::InvalidArgument("lambda must be > 0");
  return config;
}

hmr::PipelineOptions to_pipeline(const hmr_fit_options& fit, const hmr_experiment_options& options) {
  hmr::PipelineOptions p;
  p.config = to_config(fit);
  p.lambda = fit.lambda;
  p.jobs = options.jobs == 0 ? 1 : options.jobs;
  p.inner_folds = options.inner_folds;
  return p;
}

hmr::ReportContext to_context(const char* command, const hmr_experiment_options& options) {
  hmr::ReportContext context;
  context.command = command;
  context.include_timings = options.include_timings != 0;
  for (std::size_t i = 0; i < options.config_count; ++i) {
    if (options.config_keys == nullptr || options.config_values == nullptr) break;
    context.config.emplace_back(options.config_keys[i], options.config_values[i]);
  }
  return context;
}

hmr::ReportFormat to_format(hmr_format format) {
  switch (format) {
    case HMR_FORMAT_TEXT:
      return hmr::ReportFormat::Text;
    case HMR_FORMAT_JSON:
      return hmr::ReportFormat::Json;
    case HMR_FORMAT_TABLE:
      return hmr::ReportFormat::Table;
  }
  throw hmr::InvalidArgument("unknown report format");
}

hmr::SupervisedSet windowed(const hmr::CultureDataset& data, const hmr_task& task) {
  auto result = hmr::window(data, to_spec(data, task));
  if (result.set.rows() == 0) throw hmr::DataError("no supervised rows could be formed from the dataset");
  return std::move(result.set);
}

hmr_text* make_text(std::string value) { return new hmr_text{std::move(value)}; }

std::vector<double> grid_of(const hmr_experiment_options& options) {
  if (options.grid == nullptr || options.grid_size == 0) return hmr::default_theta_grid();
  return {options.grid, options.grid + options.grid_size};
}

}  // namespace

extern "C" {

const char* hmr_version(void) { return "1.0.0"; }

const char* hmr_last_error(void) { return last_error.c_str(); }

const char* hmr_status_name(hmr_status status) {
  switch (status) {
    case HMR_OK:
      return "ok";
    case HMR_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case HMR_ERR_DATA:
      return "data error";
    case HMR_ERR_NUMERIC:
      return "numeric error";
    case HMR_ERR_IO:
      return "i/o error";
    case HMR_ERR_STATE:
      return "invalid state";
    case HMR_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

hmr_synth_options hmr_synth_options_default(void) {
  return hmr_synth_options{106, 15, 0.02, 1, HMR_DATASET_BIOPROCESS};
}

hmr_fit_options hmr_fit_options_default(void) {
  const hmr::ClusterConfig config;
  return hmr_fit_options{config.theta, config.top_k, config.expansion_fraction, 1.0};
}

hmr_experiment_options hmr_experiment_options_default(void) {
  hmr_experiment_options o{};
  o.folds = 5;
  o.inner_folds = 5;
  o.seed = 1;
  o.jobs = 1;
  o.min_folds = 3;
  return o;
}

hmr_status hmr_dataset_synthesize(const hmr_synth_options* options, hmr_dataset** out) {
  return guarded([&] {
    require_out(out);
    const auto& o = deref(options, "options");
    const hmr::SynthOptions synth{o.cultures, o.days, o.noise, o.seed};
    auto data = o.kind == HMR_DATASET_BENCHMARK ? hmr::synthesize_benchmark(synth) : hmr::synthesize(synth);
    *out = new hmr_dataset{std::move(data)};
  });
}

hmr_status hmr_dataset_load(const char* path, int carry_forward, hmr_dataset** out) {
  return guarded([&] {
    require_out(out);
    if (path == nullptr) throw hmr::InvalidArgument("path is NULL");
    *out = new hmr_dataset{hmr::load_cultures(path, hmr::LoadOptions{carry_forward != 0})};
  });
}

hmr_status hmr_dataset_save(const hmr_dataset* dataset, const char* path) {
  return guarded([&] {
    if (path == nullptr) throw hmr::InvalidArgument("path is NULL");
    hmr::save_cultures(deref(dataset, "dataset").data, path);
  });
}

void hmr_dataset_free(hmr_dataset* dataset) { delete dataset; }

size_t hmr_dataset_culture_count(const hmr_dataset* dataset) {
  return dataset ? dataset->data.cultures.size() : 0;
}

size_t hmr_dataset_day_count(const hmr_dataset* dataset) { return dataset ? dataset->data.day_count() : 0; }

size_t hmr_dataset_parameter_count(const hmr_dataset* dataset) {
  return dataset ? dataset->data.parameters.size() : 0;
}

const char* hmr_dataset_parameter_name(const hmr_dataset* dataset, size_t index) {
  if (dataset == nullptr || index >= dataset->data.parameters.size()) return nullptr;
  return dataset->data.parameters[index].c_str();
}

hmr_status hmr_dataset_window(const hmr_dataset* dataset, const hmr_task* task, hmr_text** out, size_t* rows) {
  return guarded([&] {
    require_out(out);
    const auto& data = deref(dataset, "dataset").data;
    const auto result = hmr::window(data, to_spec(data, deref(task, "task")));
    std::ostringstream csv;
    hmr::write_supervised(result.set, csv);
    if (rows) *rows = result.set.rows();
    *out = make_text(csv.str());
  });
}

hmr_status hmr_model_train(const hmr_dataset* dataset, const hmr_task* task, const hmr_fit_options* options,
                           hmr_model** out, hmr_train_metrics* metrics) {
  return guarded([&] {
    require_out(out);
    const auto& data = deref(dataset, "dataset").data;
    const auto& fit_options = deref(options, "options");
    const hmr::ClusterConfig config = to_config(fit_options);
    const auto set = windowed(data, deref(task, "task"));
    const auto start = std::chrono::steady_clock::now();
    auto model = hmr::fit(set, config, fit_options.lambda);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (metrics) {
      *metrics = hmr_train_metrics{hmr::scaled_rmse(model, set), model.box_count(), set.rows(), set.features(),
                                   seconds};
    }
    *out = new hmr_model{std::move(model)};
  });
}

hmr_status hmr_model_load(const char* path, hmr_model** out) {
  return guarded([&] {
    require_out(out);
    if (path == nullptr) throw hmr::InvalidArgument("path is NULL");
    *out = new hmr_model{hmr::load_model(path)};
  });
}

hmr_status hmr_model_save(const hmr_model* model, const char* path) {
  return guarded([&] {
    if (path == nullptr) throw hmr::InvalidArgument("path is NULL");
    hmr::save_model(deref(model, "model").model, path);
  });
}

void hmr_model_free(hmr_model* model) { delete model; }

size_t hmr_model_box_count(const hmr_model* model) { return model ? model->model.box_count() : 0; }

size_t hmr_model_feature_count(const hmr_model* model) { return model ? model->model.dim() : 0; }

const char* hmr_model_feature_name(const hmr_model* model, size_t index) {
  if (model == nullptr || index >= model->model.metadata().feature_names.size()) return nullptr;
  return model->model.metadata().feature_names[index].c_str();
}

const char* hmr_model_target(const hmr_model* model) {
  return model ? model->model.metadata().target_name.c_str() : nullptr;
}

int hmr_model_horizon(const hmr_model* model) { return model ? model->model.metadata().horizon : 0; }

hmr_status hmr_model_predict(const hmr_model* model, const double* x, size_t n, double* y) {
  return guarded([&] {
    if (x == nullptr || y == nullptr) throw hmr::InvalidArgument("input or output pointer is NULL");
    *y = deref(model, "model").model.predict({x, n});
  });
}

hmr_status hmr_model_predict_recursive(const hmr_model* first, const hmr_model* second, const double* x,
                                       size_t n, double* y_next, double* y_after) {
  return guarded([&] {
    if (x == nullptr || y_next == nullptr || y_after == nullptr) {
      throw hmr::InvalidArgument("input or output pointer is NULL");
    }
    const auto [next, after] =
        hmr::predict_recursive(deref(first, "first model").model, deref(second, "second model").model, {x, n});
    *y_next = next;
    *y_after = after;
  });
}

hmr_status hmr_predict_dataset(const hmr_model* first, const hmr_model* second, const hmr_dataset* dataset,
                               hmr_text** out, size_t* rows) {
  return guarded([&] {
    require_out(out);
    const auto& m1 = deref(first, "first model").model;
    const auto& data = deref(dataset, "dataset").data;
    const auto& meta = m1.metadata();
    if (meta.feature_names.empty()) throw hmr::DataError("first model carries no feature names");
    std::ostringstream csv;
    std::size_t written = 0;
    using hmr::detail::format_double;

    if (second == nullptr) {
      // A direct model forecasts meta.horizon days ahead from observed inputs.
      const auto result = hmr::window(data, {meta.feature_names, meta.target_name, meta.horizon, false});
      csv << "culture_id,day,target_day,prediction,actual\n";
      for (std::size_t r = 0; r < result.set.rows(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const double yhat = m1.predict({result.set.inputs.row(row).data(), result.set.features()});
        csv << result.set.cultures[r] << ',' << result.set.days[r] << ',' << result.set.days[r] + meta.horizon << ','
            << format_double(yhat) << ',' << format_double(result.set.targets(row)) << '\n';
        ++written;
      }
    } else {
      const auto& m2 = second->model;
      std::vector<std::string> expected = meta.feature_names;
      expected.push_back(hmr::intermediate_feature_name(meta.target_name));
      if (m2.metadata().feature_names != expected) {
        throw hmr::DataError("second model features do not extend the first model's features with " +
                             expected.back());
      }
      const auto result = hmr::window(data, {meta.feature_names, meta.target_name, 2, true});
      const std::size_t n = meta.feature_names.size();
      csv << "culture_id,day,prediction_t1,prediction_t2,actual_t1,actual_t2\n";
      for (std::size_t r = 0; r < result.set.rows(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const double* x = result.set.inputs.row(row).data();
        const auto [next, after] = hmr::predict_recursive(m1, m2, {x, n});
        csv << result.set.cultures[r] << ',' << result.set.days[r] << ',' << format_double(next) << ','
            << format_double(after) << ',' << format_double(x[n]) << ',' << format_double(result.set.targets(row))
            << '\n';
        ++written;
      }
    }
    if (rows) *rows = written;
    *out = make_text(csv.str());
  });
}

hmr_status hmr_cross_validate(const hmr_dataset* dataset, const hmr_task* task, const hmr_fit_options* fit,
                              const hmr_experiment_options* options, hmr_report** report) {
  return guarded([&] {
    require_out(report);
    const auto& o = deref(options, "options");
    const auto& data = deref(dataset, "dataset").data;
    const auto& t = deref(task, "task");
    const auto set = windowed(data, t);
    const auto pipeline = to_pipeline(deref(fit, "fit options"), o);
    if (t.horizon == 2 && t.include_intermediate) {
      // The chain needs both horizons; plan on the horizon-1 cultures, which
      // include every culture of the horizon-2 set.
      if (o.tune) throw hmr::InvalidArgument("tuned cross-validation of the two-day chain is not supported");
      hmr_task first_task = t;
      first_task.horizon = 1;
      const auto first = windowed(data, first_task);
      const auto plan = hmr::plan_folds(first.cultures, o.folds, o.seed);
      *report = new hmr_report{hmr::chained_cross_validate(first, set, plan, pipeline), to_context("cv", o)};
      return;
    }
    const auto plan = hmr::plan_folds(set.cultures, o.folds, o.seed);
    if (o.tune) {
      *report = new hmr_report{hmr::nested_cross_validate(set, plan, grid_of(o), pipeline), to_context("cv", o)};
    } else {
      *report = new hmr_report{hmr::cross_validate(set, plan, pipeline), to_context("cv", o)};
    }
  });
}

hmr_status hmr_tune(const hmr_dataset* dataset, const hmr_task* task, const hmr_fit_options* fit,
                    const hmr_experiment_options* options, hmr_report** report) {
  return guarded([&] {
    require_out(report);
    const auto& o = deref(options, "options");
    const auto set = windowed(deref(dataset, "dataset").data, deref(task, "task"));
    const auto pipeline = to_pipeline(deref(fit, "fit options"), o);
    const auto plan = hmr::plan_folds(set.cultures, o.folds, o.seed);
    *report = new hmr_report{hmr::grid_search_theta(set, plan, grid_of(o), pipeline), to_context("tune", o)};
  });
}

hmr_status hmr_select_features(const hmr_dataset* dataset, const hmr_task* task, const hmr_fit_options* fit,
                               const hmr_experiment_options* options, hmr_report** report) {
  return guarded([&] {
    require_out(report);
    const auto& o = deref(options, "options");
    const auto set = windowed(deref(dataset, "dataset").data, deref(task, "task"));
    const auto pipeline = to_pipeline(deref(fit, "fit options"), o);
    const auto plan = hmr::plan_folds(set.cultures, o.folds, o.seed);
    *report = new hmr_report{hmr::select_features(set, plan, pipeline, o.min_folds), to_context("featsel", o)};
  });
}

hmr_status hmr_report_render(const hmr_report* report, hmr_format format, hmr_text** out) {
  return guarded([&] {
    require_out(out);
    const auto& r = deref(report, "report");
    const auto f = to_format(format);
    *out = make_text(std::visit([&](const auto& result) { return hmr::render(result, r.context, f); }, r.result));
  });
}

void hmr_report_free(hmr_report* report) { delete report; }

const char* hmr_text_data(const hmr_text* text) { return text ? text->value.c_str() : ""; }

size_t hmr_text_size(const hmr_text* text) { return text ? text->value.size() : 0; }

void hmr_text_free(hmr_text* text) { delete text; }

}  // extern "C"

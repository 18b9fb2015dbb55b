#include "hmr/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "hmr/error.hpp"
#include "hmr/regressor.hpp"
#include "parallel.hpp"

namespace hmr {

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw InvalidArgument("rmse: empty input");
  if (predictions.size() != targets.size()) throw InvalidArgument("rmse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

std::size_t FoldPlan::fold_index(const std::string& culture) const {
  const auto it = std::lower_bound(cultures.begin(), cultures.end(), culture);
  if (it == cultures.end() || *it != culture) throw DataError("culture '" + culture + "' is not in the fold plan");
  return fold_of[static_cast<std::size_t>(it - cultures.begin())];
}

std::vector<std::string> FoldPlan::members(std::size_t fold) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < cultures.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(cultures[i]);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (std::size_t f : fold_of) ++out[f];
  return out;
}

FoldPlan plan_folds(std::vector<std::string> culture_ids, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("plan_folds: need at least 2 folds");
  std::sort(culture_ids.begin(), culture_ids.end());
  culture_ids.erase(std::unique(culture_ids.begin(), culture_ids.end()), culture_ids.end());
  if (culture_ids.size() < k) {
    throw InvalidArgument("plan_folds: " + std::to_string(culture_ids.size()) + " cultures cannot fill " +
                          std::to_string(k) + " folds");
  }
  // Fisher-Yates with an explicit bounded draw keeps the order identical
  // across standard library implementations.
  std::vector<std::size_t> order(culture_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 engine(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = engine();
    while (draw >= limit) draw = engine();
    std::swap(order[i - 1], order[static_cast<std::size_t>(draw % bound)]);
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.cultures = std::move(culture_ids);
  plan.fold_of.assign(plan.cultures.size(), 0);
  for (std::size_t position = 0; position < order.size(); ++position) {
    plan.fold_of[order[position]] = position % k;
  }
  return plan;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> fold_rows(const SupervisedSet& set, const FoldPlan& plan, std::size_t fold,
                                   bool in_fold) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < set.rows(); ++r) {
    if ((plan.fold_index(set.cultures[r]) == fold) == in_fold) rows.push_back(r);
  }
  return rows;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

namespace {

template <typename Field>
Summary summarize_folds(const std::vector<FoldResult>& folds, Field field) {
  std::vector<double> values;
  for (const auto& f : folds) values.push_back(static_cast<double>(field(f)));
  return summarize(values);
}

std::vector<std::string> distinct_cultures(const SupervisedSet& set) {
  std::set<std::string> unique(set.cultures.begin(), set.cultures.end());
  return {unique.begin(), unique.end()};
}

void notify(const PipelineOptions& options, const char* stage, int outer, int inner,
            const SupervisedSet& consumed) {
  if (!options.observer) return;
  options.observer(TrainingEvent{stage, outer, inner, distinct_cultures(consumed)});
}

// Every fit in the pipelines goes through here so that observers see exactly
// the rows the scaler and the regressor learn from.
HmrModel observed_fit(const SupervisedSet& train, const ClusterConfig& config, const PipelineOptions& options,
                      int outer, int inner) {
  notify(options, "scale", outer, inner, train);
  notify(options, "fit", outer, inner, train);
  return fit(train, config, options.lambda);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PipelineOptions serial(const PipelineOptions& options) {
  PipelineOptions copy = options;
  copy.jobs = 1;
  return copy;
}

FoldResult evaluate_split(const SupervisedSet& train, const SupervisedSet& test, const ClusterConfig& config,
                          const PipelineOptions& options, std::size_t fold, int outer, int inner) {
  const auto start = std::chrono::steady_clock::now();
  const HmrModel model = observed_fit(train, config, options, outer, inner);
  FoldResult r;
  r.fold = fold;
  r.theta = config.theta;
  r.train_rmse = scaled_rmse(model, train);
  r.test_rmse = scaled_rmse(model, test);
  r.boxes = model.box_count();
  r.train_rows = train.rows();
  r.test_rows = test.rows();
  r.features = train.features();
  r.seconds = seconds_since(start);
  return r;
}

void require_test_rows(const std::vector<std::size_t>& rows, std::size_t fold) {
  if (rows.empty()) throw DataError("fold " + std::to_string(fold) + " has no test samples");
}

}  // namespace

Summary CvReport::test_rmse() const {
  return summarize_folds(folds, [](const FoldResult& f) { return f.test_rmse; });
}

Summary CvReport::train_rmse() const {
  return summarize_folds(folds, [](const FoldResult& f) { return f.train_rmse; });
}

Summary CvReport::boxes() const {
  return summarize_folds(folds, [](const FoldResult& f) { return f.boxes; });
}

CvReport cross_validate(const SupervisedSet& data, const FoldPlan& plan, const PipelineOptions& options,
                        int outer_fold) {
  options.config.validate();
  CvReport report;
  report.k = plan.k;
  report.seed = plan.seed;
  report.target = data.target_name;
  report.horizon = data.horizon;
  report.folds.resize(plan.k);
  detail::run_indexed(plan.k, options.jobs, [&](std::size_t f) {
    const auto test_rows = fold_rows(data, plan, f, true);
    require_test_rows(test_rows, f);
    const int outer = outer_fold >= 0 ? outer_fold : static_cast<int>(f);
    const int inner = outer_fold >= 0 ? static_cast<int>(f) : -1;
    report.folds[f] = evaluate_split(data.select_rows(fold_rows(data, plan, f, false)),
                                     data.select_rows(test_rows), options.config, options, f, outer, inner);
  });
  return report;
}

namespace {

double chained_rmse(const HmrModel& first, const HmrModel& second, const SupervisedSet& set) {
  const std::size_t n = first.dim();
  std::vector<double> predicted(set.rows()), actual(set.rows());
  const ScalerParams& scaler = second.scaler();
  for (std::size_t r = 0; r < set.rows(); ++r) {
    const auto row = set.inputs.row(static_cast<Eigen::Index>(r));
    predicted[r] = scaler.scale_target(predict_recursive(first, second, {row.data(), n}).second);
    actual[r] = scaler.scale_target(set.targets[static_cast<Eigen::Index>(r)]);
  }
  return rmse(predicted, actual);
}

}  // namespace

CvReport chained_cross_validate(const SupervisedSet& first, const SupervisedSet& second, const FoldPlan& plan,
                                const PipelineOptions& options) {
  options.config.validate();
  if (second.features() != first.features() + 1) {
    throw InvalidArgument("chained_cross_validate: second set must have one more input than the first");
  }
  for (std::size_t c = 0; c < first.features(); ++c) {
    if (first.feature_names[c] != second.feature_names[c]) {
      throw InvalidArgument("chained_cross_validate: feature '" + first.feature_names[c] + "' does not line up");
    }
  }
  CvReport report;
  report.k = plan.k;
  report.seed = plan.seed;
  report.target = second.target_name;
  report.horizon = second.horizon;
  report.folds.resize(plan.k);
  detail::run_indexed(plan.k, options.jobs, [&](std::size_t f) {
    const auto start = std::chrono::steady_clock::now();
    const auto test_rows = fold_rows(second, plan, f, true);
    require_test_rows(test_rows, f);
    const int outer = static_cast<int>(f);
    const SupervisedSet train = second.select_rows(fold_rows(second, plan, f, false));
    const SupervisedSet test = second.select_rows(test_rows);
    const HmrModel m1 = observed_fit(first.select_rows(fold_rows(first, plan, f, false)), options.config,
                                     options, outer, -1);
    const HmrModel m2 = observed_fit(train, options.config, options, outer, -1);
    FoldResult& r = report.folds[f];
    r.fold = f;
    r.theta = options.config.theta;
    r.train_rmse = chained_rmse(m1, m2, train);
    r.test_rmse = chained_rmse(m1, m2, test);
    r.boxes = m1.box_count() + m2.box_count();
    r.train_rows = train.rows();
    r.test_rows = test.rows();
    r.features = second.features();
    r.seconds = seconds_since(start);
  });
  return report;
}

std::vector<double> default_theta_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}; }

GridResult grid_search_theta(const SupervisedSet& data, const FoldPlan& plan, const std::vector<double>& grid,
                             const PipelineOptions& options, int outer_fold) {
  if (grid.empty()) throw InvalidArgument("grid_search_theta: empty grid");
  for (double theta : grid) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("grid_search_theta: theta outside [0, 1]");
  }
  notify(options, "tune", outer_fold, -1, data);
  GridResult result;
  result.points.resize(grid.size());
  detail::run_indexed(grid.size(), options.jobs, [&](std::size_t g) {
    PipelineOptions point = serial(options);
    point.config.theta = grid[g];
    result.points[g] = {grid[g], cross_validate(data, plan, point, outer_fold)};
  });

  double best_rmse = 0.0;
  for (std::size_t g = 0; g < result.points.size(); ++g) {
    const double mean = result.points[g].report.test_rmse().mean;
    const bool better = mean < best_rmse - kThetaTieTolerance;
    const bool tie_but_larger = std::abs(mean - best_rmse) <= kThetaTieTolerance && grid[g] > result.best_theta;
    if (g == 0 || better || tie_but_larger) {
      result.best_theta = grid[g];
      best_rmse = mean;
    }
  }
  return result;
}

TunedCvReport nested_cross_validate(const SupervisedSet& data, const FoldPlan& plan,
                                    const std::vector<double>& grid, const PipelineOptions& options) {
  TunedCvReport out;
  out.report.k = plan.k;
  out.report.seed = plan.seed;
  out.report.target = data.target_name;
  out.report.horizon = data.horizon;
  out.report.folds.resize(plan.k);
  out.folds.resize(plan.k);
  const PipelineOptions inner_options = serial(options);
  detail::run_indexed(plan.k, options.jobs, [&](std::size_t f) {
    const auto test_rows = fold_rows(data, plan, f, true);
    require_test_rows(test_rows, f);
    const SupervisedSet train = data.select_rows(fold_rows(data, plan, f, false));
    const SupervisedSet test = data.select_rows(test_rows);
    const FoldPlan inner = plan_folds(train.cultures, options.inner_folds, derive_seed(plan.seed, f));
    const int outer = static_cast<int>(f);

    const auto start = std::chrono::steady_clock::now();
    GridResult tuned = grid_search_theta(train, inner, grid, inner_options, outer);
    ClusterConfig config = options.config;
    config.theta = tuned.best_theta;
    FoldResult result = evaluate_split(train, test, config, inner_options, f, outer, -1);
    result.seconds = seconds_since(start);
    out.report.folds[f] = result;
    out.folds[f] = {result, std::move(tuned)};
  });
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pearson: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

FeatureRanking rank_features(const SupervisedSet& train) {
  if (train.rows() < 2) throw InvalidArgument("rank_features: need at least 2 samples");
  const std::span<const double> target(train.targets.data(), train.rows());
  if (train.targets.maxCoeff() == train.targets.minCoeff()) {
    throw DataError("rank_features: target is constant");
  }
  FeatureRanking ranking;
  for (std::size_t c = 0; c < train.features(); ++c) {
    const Vector column = train.inputs.col(static_cast<Eigen::Index>(c));
    ranking.push_back({train.feature_names.at(c), c,
                       pearson({column.data(), train.rows()}, target)});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return std::abs(a.correlation) > std::abs(b.correlation);
  });
  return ranking;
}

ForwardResult forward_select(const SupervisedSet& train, const FeatureRanking& ranking, const FoldPlan& plan,
                             const PipelineOptions& options, int outer_fold) {
  if (ranking.size() != train.features()) throw InvalidArgument("forward_select: ranking does not cover all features");
  const std::size_t n = ranking.size();
  ForwardResult result;
  result.curve.resize(n);
  result.curve_std.resize(n);
  const PipelineOptions point = serial(options);
  detail::run_indexed(n, options.jobs, [&](std::size_t i) {
    std::vector<std::size_t> columns;
    for (std::size_t j = 0; j <= i; ++j) columns.push_back(ranking[j].column);
    const CvReport report = cross_validate(train.select_features(columns), plan, point, outer_fold);
    result.curve[i] = report.test_rmse().mean;
    result.curve_std[i] = report.test_rmse().std;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (result.curve[i] < result.curve[best] - kThetaTieTolerance) best = i;
  }
  result.best_k = best + 1;
  return result;
}

std::vector<std::string> consensus_features(const std::vector<std::vector<std::string>>& per_fold,
                                            std::size_t min_folds) {
  std::vector<std::string> order;
  std::vector<std::size_t> counts;
  for (const auto& fold : per_fold) {
    std::set<std::string> seen;
    for (const auto& name : fold) {
      if (!seen.insert(name).second) continue;
      const auto it = std::find(order.begin(), order.end(), name);
      if (it == order.end()) {
        order.push_back(name);
        counts.push_back(1);
      } else {
        ++counts[static_cast<std::size_t>(it - order.begin())];
      }
    }
  }
  std::vector<std::string> selected;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (counts[i] >= min_folds) selected.push_back(order[i]);
  }
  return selected;
}

FeatselReport select_features(const SupervisedSet& data, const FoldPlan& plan, const PipelineOptions& options,
                              std::size_t min_folds) {
  options.config.validate();
  FeatselReport report;
  report.k = plan.k;
  report.seed = plan.seed;
  report.target = data.target_name;
  report.min_folds = min_folds;
  report.folds.resize(plan.k);
  const PipelineOptions inner_options = serial(options);
  detail::run_indexed(plan.k, options.jobs, [&](std::size_t f) {
    const auto test_rows = fold_rows(data, plan, f, true);
    require_test_rows(test_rows, f);
    const SupervisedSet train = data.select_rows(fold_rows(data, plan, f, false));
    const SupervisedSet test = data.select_rows(test_rows);
    const int outer = static_cast<int>(f);

    notify(options, "rank", outer, -1, train);
    FeatselFold& out = report.folds[f];
    out.fold = f;
    out.ranking = rank_features(train);
    const FoldPlan inner = plan_folds(train.cultures, options.inner_folds, derive_seed(plan.seed, f));
    out.forward = forward_select(train, out.ranking, inner, inner_options, outer);

    std::vector<std::size_t> columns;
    for (std::size_t j = 0; j < out.forward.best_k; ++j) {
      columns.push_back(out.ranking[j].column);
      out.selected.push_back(out.ranking[j].name);
    }
    const FoldResult scored = evaluate_split(train.select_features(columns), test.select_features(columns),
                                             options.config, inner_options, f, outer, -1);
    out.test_rmse = scored.test_rmse;
    out.boxes = scored.boxes;
  });
  std::vector<std::vector<std::string>> per_fold;
  for (const auto& f : report.folds) per_fold.push_back(f.selected);
  report.consensus = consensus_features(per_fold, min_folds);
  return report;
}

}  // namespace hmr

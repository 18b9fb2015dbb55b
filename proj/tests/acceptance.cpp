// Acceptance suite: one PASS/FAIL line per criterion. Tolerances, sizes and
// runtime limits are pinned below; the process exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hmr/regressor.hpp"
#include "hmr/report.hpp"
#include "hmr/selection.hpp"
#include "oracles.hpp"

using namespace hmr;

namespace {

constexpr int kMembershipCases = 100000;
constexpr double kMembershipSeconds = 5.0;
constexpr int kLsoInstances = 100;
constexpr double kLsoResidualTol = 1e-6;
constexpr double kLsoSeconds = 10.0;
constexpr int kEquivalenceModels = 1000;
constexpr double kEquivalenceTol = 1e-10;
constexpr double kExactRmseTol = 1e-9;
constexpr int kContainmentDatasets = 50;
constexpr double kAccuracyRatio = 0.6;
constexpr double kPipelineSeconds = 120.0;

using Vec = std::vector<double>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// The benchmark used by the accuracy, horizon and determinism checks.
CultureDataset benchmark(std::size_t cultures = 106) { return synthesize_benchmark({cultures, 15, 0.02, 2024}); }

const std::vector<std::string> kBenchFeatures{"u1", "u2", "y"};

SupervisedSet bench_set(const CultureDataset& data, int horizon) {
  return window(data, {kBenchFeatures, "y", horizon}).set;
}

PipelineOptions with_theta(double theta) {
  PipelineOptions o;
  o.config.theta = theta;
  return o;
}

Outcome membership_correctness() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0), wide(-0.5, 1.5), lam(0.05, 8.0);
  std::uniform_int_distribution<int> dims(1, 8);
  std::size_t violations = 0;
  for (int trial = 0; trial < kMembershipCases; ++trial) {
    const auto n = static_cast<std::size_t>(dims(rng));
    Vec lo(n), hi(n), lambda(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = u(rng), b = u(rng);
      lo[i] = std::min(a, b);
      hi[i] = std::max(a, b);
      lambda[i] = lam(rng);
      // a third of the cases put the point inside the box
      x[i] = trial % 3 == 0 ? lo[i] + (hi[i] - lo[i]) * u(rng) : wide(rng);
    }
    const Hyperbox box(lo, hi);
    const MembershipParams params(lambda);
    const double m = membership(box, x, params);
    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) inside = inside && lo[i] <= x[i] && x[i] <= hi[i];
    if (!(m >= 0.0 && m <= 1.0)) ++violations;
    if ((m == 1.0) != inside) ++violations;
    // moving one coordinate further out never raises membership
    const std::size_t i = static_cast<std::size_t>(trial) % n;
    Vec out = x;
    if (x[i] > hi[i]) out[i] += 0.05 + u(rng);
    else if (x[i] < lo[i]) out[i] -= 0.05 + u(rng);
    else out[i] = hi[i] + u(rng);
    if (membership(box, out, params) > m) ++violations;
  }
  return {violations == 0, "cases=" + std::to_string(kMembershipCases) + " violations=" + std::to_string(violations)};
}

Outcome lso_oracle_equivalence() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> rows_d(5, 50), cols_d(1, 12);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  int deficient = 0;
  for (int trial = 0; trial < kLsoInstances; ++trial) {
    const auto s = static_cast<std::size_t>(cols_d(rng));
    const auto n = static_cast<std::size_t>(rows_d(rng));
    // every other instance is rank-deficient (or wide, which is the same thing)
    const std::size_t rank = trial % 2 == 0 && s > 1 ? 1 + static_cast<std::size_t>(trial) % (s - 1) : s;
    const auto a = oracle::random_matrix(rng, n, s, rank);
    if (std::min(rank, n) < s) ++deficient;
    Vec y(n);
    for (auto& v : y) v = n01(rng);
    Matrix am(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < s; ++c) am(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c];
    }
    const Vector d = solve_lso(am, Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(n)));
    const Vec dv(d.data(), d.data() + d.size());
    const double gap = std::abs(oracle::residual_norm(a, dv, y) - oracle::residual_norm(a, oracle::least_squares(a, y), y));
    worst = std::max(worst, gap);
  }
  return {worst <= kLsoResidualTol, "instances=" + std::to_string(kLsoInstances) + " rank_deficient=" +
                                        std::to_string(deficient) + fmt(" max_residual_gap=%.3g", worst)};
}

Outcome layer_matrix_equivalence() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0), theta_d(0.05, 0.8);
  double worst = 0.0;
  std::size_t boxes = 0;
  for (int trial = 0; trial < kEquivalenceModels; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
    const Eigen::Index rows = 12 + trial % 20;
    Matrix x(rows, static_cast<Eigen::Index>(n));
    Vector y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = u(rng);
      y(r) = u(rng);  // targets live in the scaled [0,1] range
    }
    ClusterConfig config;
    config.theta = theta_d(rng);
    config.top_k = 1 + static_cast<std::size_t>(trial % 4);
    const HmrModel model = fit_scaled(x, y, config, MembershipParams::uniform(n, 0.5 + 2.0 * u(rng)));
    boxes += model.box_count();
    Matrix q(4, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < 4; ++r) {
      for (Eigen::Index c = 0; c < q.cols(); ++c) q(r, c) = -0.3 + 1.6 * u(rng);
    }
    const Vector matrix_form = assemble_design(q, model.boxes(), model.params()) * model.coefficients();
    for (Eigen::Index r = 0; r < 4; ++r) {
      const Vec xr(q.row(r).data(), q.row(r).data() + n);
      worst = std::max(worst, std::abs(model.predict_scaled(xr) - matrix_form(r)));
    }
  }
  return {worst <= kEquivalenceTol, "models=" + std::to_string(kEquivalenceModels) +
                                        fmt(" mean_boxes=%.1f", static_cast<double>(boxes) / kEquivalenceModels) +
                                        fmt(" max_abs_diff=%.3g", worst)};
}

Outcome degenerate_exactness() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index rows = 300;
  Matrix x(rows, 4);
  Vector y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) x(r, c) = u(rng);
    y(r) = 0.1 + 0.25 * x(r, 0) - 0.15 * x(r, 1) + 0.3 * x(r, 2) + 0.05 * x(r, 3);
  }
  ClusterConfig config;
  config.theta = 1.0;
  const HmrModel model = fit_scaled(x, y, config, MembershipParams::uniform(4));
  const double train = std::sqrt((model.predict_scaled(x) - y).squaredNorm() / static_cast<double>(rows));
  return {model.box_count() == 1 && train < kExactRmseTol,
          "boxes=" + std::to_string(model.box_count()) + fmt(" train_rmse=%.3g", train)};
}

Outcome single_pass_containment() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t uncovered = 0;
  for (int trial = 0; trial < kContainmentDatasets; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
    const std::size_t rows = 50 + 10 * static_cast<std::size_t>(trial);
    Vec samples(rows * n);
    for (auto& v : samples) v = u(rng);
    ClusterConfig config;
    config.theta = 0.05 + 0.9 * u(rng);
    config.top_k = 1 + static_cast<std::size_t>(trial % 5);
    const auto params = MembershipParams::uniform(n);
    const auto boxes = cluster(samples, n, config, params);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::span<const double> x(samples.data() + r * n, n);
      const bool covered =
          std::any_of(boxes.begin(), boxes.end(), [&](const Hyperbox& b) { return membership(b, x, params) == 1.0; });
      if (!covered) ++uncovered;
    }
  }
  return {uncovered == 0, "datasets=" + std::to_string(kContainmentDatasets) + " uncovered=" + std::to_string(uncovered)};
}

Outcome complexity_vs_theta() {
  const SupervisedSet set = bench_set(benchmark(), 1);
  const Matrix x = fit_scaler(set).apply(set.inputs);
  const auto params = MembershipParams::uniform(set.features());
  std::vector<std::size_t> counts;
  std::string line;
  for (double theta : default_theta_grid()) {
    ClusterConfig config;
    config.theta = theta;
    counts.push_back(cluster({x.data(), static_cast<std::size_t>(x.size())}, set.features(), config, params).size());
    line += (line.empty() ? "" : ",") + std::to_string(counts.back());
  }
  return {counts.back() < counts.front(), "boxes(theta=0.1..0.7)=" + line};
}

Outcome accuracy_vs_linear() {
  const auto start = std::chrono::steady_clock::now();
  const SupervisedSet set = bench_set(benchmark(), 1);
  const FoldPlan plan = plan_folds(set.cultures, 5, 2024);
  const TunedCvReport tuned = nested_cross_validate(set, plan, default_theta_grid(), with_theta(0.3));
  const CvReport linear = cross_validate(set, plan, with_theta(1.0));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double hmr = tuned.report.test_rmse().mean;
  const double base = linear.test_rmse().mean;
  std::string thetas;
  for (const auto& f : tuned.folds) thetas += fmt(thetas.empty() ? "%.1f" : ",%.1f", f.grid.best_theta);
  return {hmr <= kAccuracyRatio * base && seconds < kPipelineSeconds,
          fmt("tuned=%.4f", hmr) + fmt(" linear=%.4f", base) + fmt(" ratio=%.3f", hmr / base) + " thetas=" + thetas +
              fmt(" pipeline=%.1fs", seconds) + fmt(" (limit %.0fs)", kPipelineSeconds)};
}

Outcome feature_selection() {
  const CultureDataset data = synthesize({106, 15, 0.02, 2024});
  const SupervisedSet set = window(data, {data.parameters, "mAb", 1}).set;
  const FoldPlan plan = plan_folds(set.cultures, 5, 2024);
  const FeatselReport report = select_features(set, plan, with_theta(0.7));
  std::size_t first = 0;
  std::string ks;
  for (const auto& f : report.folds) {
    first += f.ranking.front().name == "mAb" ? 1 : 0;
    ks += (ks.empty() ? "" : ",") + std::to_string(f.forward.best_k);
  }
  const bool in_consensus = std::find(report.consensus.begin(), report.consensus.end(), "mAb") != report.consensus.end();
  return {first == report.folds.size() && in_consensus,
          "lag ranked first in " + std::to_string(first) + "/5 folds, in consensus=" + (in_consensus ? "yes" : "no") +
              " best_k=" + ks + " consensus_size=" + std::to_string(report.consensus.size())};
}

Outcome horizon_two() {
  const CultureDataset data = benchmark();
  const SupervisedSet h1 = bench_set(data, 1);
  const SupervisedSet h2 = bench_set(data, 2);

  // end to end on every horizon-2 window, and the pass-through identity
  ClusterConfig config;
  config.theta = 0.3;
  const HmrModel first = fit(h1, config);
  const HmrModel second = fit(h2, config);
  const std::size_t n = h1.features();
  ScalerParams identity = ScalerParams::identity(n + 1);
  Vec slope(n + 1, 0.0);
  slope[n] = 1.0;
  const HmrModel pass({Hyperbox(Vec(n + 1, 0.0), Vec(n + 1, 1.0))}, MembershipParams::uniform(n + 1),
                      {LocalExpert{slope, 0.0}}, identity, config, {h2.feature_names, "y", 2});
  std::size_t mismatches = 0, finite = 0;
  for (Eigen::Index r = 0; r < h2.inputs.rows(); ++r) {
    const std::span<const double> x(h2.inputs.row(r).data(), n);
    const auto chained = predict_recursive(first, second, x);
    finite += std::isfinite(chained.first) && std::isfinite(chained.second) ? 1 : 0;
    const auto [t1, t2] = predict_recursive(first, pass, x);
    if (t1 != t2) ++mismatches;
  }

  const FoldPlan plan = plan_folds(h1.cultures, 5, 2024);
  const double one = cross_validate(h1, plan, with_theta(0.3)).test_rmse().mean;
  const double two = chained_cross_validate(h1, h2, plan, with_theta(0.3)).test_rmse().mean;
  return {finite == h2.rows() && mismatches == 0 && two >= one,
          "rows=" + std::to_string(h2.rows()) + " pass_through_mismatches=" + std::to_string(mismatches) +
              fmt(" h1_rmse=%.4f", one) + fmt(" h2_chained_rmse=%.4f", two)};
}

Outcome group_integrity() {
  const CultureDataset data = benchmark(40);
  const SupervisedSet h1 = bench_set(data, 1);
  const SupervisedSet h2 = bench_set(data, 2);
  const FoldPlan plan = plan_folds(h1.cultures, 5, 99);
  std::mutex lock;
  std::size_t events = 0, leaks = 0;
  std::set<std::string> stages;
  PipelineOptions options = with_theta(0.5);
  options.jobs = 2;
  options.observer = [&](const TrainingEvent& e) {
    std::lock_guard<std::mutex> guard(lock);
    ++events;
    stages.insert(e.stage);
    if (e.outer_fold < 0) {
      ++leaks;  // untagged learning step
      return;
    }
    const auto outer = static_cast<std::size_t>(e.outer_fold);
    std::set<std::string> allowed;
    for (const auto& c : plan.cultures) {
      if (plan.fold_index(c) != outer) allowed.insert(c);
    }
    if (e.inner_fold >= 0) {
      const FoldPlan inner = plan_folds({allowed.begin(), allowed.end()}, options.inner_folds,
                                        derive_seed(plan.seed, outer));
      for (const auto& c : inner.members(static_cast<std::size_t>(e.inner_fold))) allowed.erase(c);
    }
    for (const auto& c : e.cultures) leaks += allowed.count(c) ? 0 : 1;
  };
  nested_cross_validate(h1, plan, {0.3, 0.6}, options);
  select_features(h1, plan, options);
  chained_cross_validate(h1, h2, plan, options);
  const bool all_stages = stages == std::set<std::string>{"fit", "rank", "scale", "tune"};
  return {leaks == 0 && all_stages && events > 0,
          "events=" + std::to_string(events) + " leaks=" + std::to_string(leaks) + " stages=" +
              std::to_string(stages.size()) + "/4"};
}

std::string full_pipeline() {
  const CultureDataset data = synthesize_benchmark({30, 15, 0.02, 77});
  std::ostringstream out;
  write_cultures(data, out);
  const SupervisedSet h1 = bench_set(data, 1);
  const SupervisedSet h2 = bench_set(data, 2);
  ClusterConfig config;
  config.theta = 0.4;
  write_model(fit(h1, config), out);
  write_model(fit(h2, config), out);
  const FoldPlan plan = plan_folds(h1.cultures, 5, 77);
  PipelineOptions options = with_theta(0.4);
  options.jobs = 2;
  const ReportContext ctx{"pipeline", {{"seed", "77"}}, false};
  const std::vector<double> grid{0.3, 0.5, 0.7};
  const auto cv = cross_validate(h1, plan, options);
  const auto tuned = nested_cross_validate(h1, plan, grid, options);
  const auto chained = chained_cross_validate(h1, h2, plan, options);
  const auto featsel = select_features(h1, plan, options);
  for (auto format : {ReportFormat::Text, ReportFormat::Json, ReportFormat::Table}) {
    out << render(cv, ctx, format) << render(tuned, ctx, format) << render(chained, ctx, format)
        << render(grid_search_theta(h1, plan, grid, options), ctx, format) << render(featsel, ctx, format);
  }
  return out.str();
}

Outcome determinism() {
  const std::string a = full_pipeline();
  const std::string b = full_pipeline();
  return {a == b && !a.empty(), "bytes=" + std::to_string(a.size()) + " identical=" + (a == b ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double limit_seconds;  // 0: no runtime limit
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "membership correctness", membership_correctness, kMembershipSeconds},
      {2, "least-squares oracle equivalence", lso_oracle_equivalence, kLsoSeconds},
      {3, "layer/matrix prediction equivalence", layer_matrix_equivalence, 0},
      {4, "degenerate exactness at theta=1", degenerate_exactness, 0},
      {5, "single-pass containment", single_pass_containment, 0},
      {6, "fewer boxes at larger theta", complexity_vs_theta, 0},
      {7, "tuned accuracy vs linear baseline", accuracy_vs_linear, 0},
      {8, "feature selection finds the lag", feature_selection, 0},
      {9, "horizon-2 chained pipeline", horizon_two, 0},
      {10, "group integrity", group_integrity, 0},
      {11, "determinism", determinism, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      o.pass = false;
      o.detail += fmt(" runtime over %.0fs", c.limit_seconds);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  criterion %2d  %-38s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

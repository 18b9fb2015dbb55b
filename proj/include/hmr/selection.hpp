#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hmr/data.hpp"
#include "hmr/hyperbox.hpp"

namespace hmr {

double rmse(std::span<const double> predictions, std::span<const double> targets);

/// Culture-level fold assignment.
struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> cultures;  // sorted
  std::vector<std::size_t> fold_of;   // parallel to `cultures`

  std::size_t fold_index(const std::string& culture) const;
  std::vector<std::string> members(std::size_t fold) const;
  std::vector<std::size_t> sizes() const;
};

/// Shuffles the distinct culture ids with `seed` and deals them round-robin
/// into k folds, so fold sizes differ by at most one.
FoldPlan plan_folds(std::vector<std::string> culture_ids, std::size_t k, std::uint64_t seed);

/// Seed for a nested plan, derived deterministically from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Row indices of `set` whose culture is (or is not) in `fold`.
std::vector<std::size_t> fold_rows(const SupervisedSet& set, const FoldPlan& plan, std::size_t fold,
                                   bool in_fold);

/// Sent to a TrainingObserver whenever data is consumed for learning.
struct TrainingEvent {
  /// "scale", "fit", "rank" or "tune".
  std::string stage;
  int outer_fold = -1;
  int inner_fold = -1;
  std::vector<std::string> cultures;  // distinct, sorted
};

using TrainingObserver = std::function<void(const TrainingEvent&)>;

struct PipelineOptions {
  ClusterConfig config;
  double lambda = 1.0;
  /// Worker threads for independent folds and grid points.
  std::size_t jobs = 1;
  std::size_t inner_folds = 5;
  /// Called from worker threads; must be thread-safe when jobs > 1.
  TrainingObserver observer;
};

struct FoldResult {
  std::size_t fold = 0;
  double theta = 0.0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  std::size_t boxes = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t features = 0;
  double seconds = 0.0;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

Summary summarize(std::span<const double> values);

struct CvReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string target;
  int horizon = 1;
  std::vector<FoldResult> folds;  // ordered by fold index

  Summary test_rmse() const;
  Summary train_rmse() const;
  Summary boxes() const;
};

/// Fits on every fold's complement and scores the held-out cultures.
/// `outer_fold` tags observer events when this runs nested.
CvReport cross_validate(const SupervisedSet& data, const FoldPlan& plan, const PipelineOptions& options,
                        int outer_fold = -1);

/// Two-day-ahead CV. `first` is the horizon-1 set and `second` the horizon-2
/// set whose last input is the target at t+1. Both models are trained on the
/// same cultures; held-out rows are predicted through the chain, so the t+1
/// input is the first model's forecast. RMSE is in the second model's scaled
/// target space and `boxes` counts both models.
CvReport chained_cross_validate(const SupervisedSet& first, const SupervisedSet& second, const FoldPlan& plan,
                                const PipelineOptions& options);

struct GridPoint {
  double theta = 0.0;
  CvReport report;
};

struct GridResult {
  double best_theta = 0.0;
  std::vector<GridPoint> points;  // grid order
};

/// Validation RMSEs closer than this are treated as equal when picking theta.
inline constexpr double kThetaTieTolerance = 1e-9;

/// The seven-point default grid 0.1, 0.2, ..., 0.7.
std::vector<double> default_theta_grid();

/// Cross-validates every theta on `data` and returns the one with the lowest
/// mean validation RMSE, preferring the larger theta on ties.
GridResult grid_search_theta(const SupervisedSet& data, const FoldPlan& plan,
                             const std::vector<double>& grid, const PipelineOptions& options,
                             int outer_fold = -1);

struct TunedFold {
  FoldResult result;
  GridResult grid;
};

struct TunedCvReport {
  CvReport report;
  std::vector<TunedFold> folds;
};

/// Outer grouped CV where each training fold picks its own theta by an
/// inner grouped CV over its cultures only.
TunedCvReport nested_cross_validate(const SupervisedSet& data, const FoldPlan& plan,
                                    const std::vector<double>& grid, const PipelineOptions& options);

struct RankedFeature {
  std::string name;
  std::size_t column = 0;
  double correlation = 0.0;
};

/// Features ordered by descending |Pearson r| with the target. Ties keep
/// column order.
using FeatureRanking = std::vector<RankedFeature>;

double pearson(std::span<const double> a, std::span<const double> b);

FeatureRanking rank_features(const SupervisedSet& train);

struct ForwardResult {
  std::size_t best_k = 0;
  std::vector<double> curve;  // mean validation RMSE for k = 1..n
  std::vector<double> curve_std;
};

/// Sweeps the top-k ranked features for k = 1..n with grouped CV on `plan`.
/// Ties in the curve keep the smaller k.
ForwardResult forward_select(const SupervisedSet& train, const FeatureRanking& ranking,
                             const FoldPlan& plan, const PipelineOptions& options, int outer_fold = -1);

/// Features present in at least `min_folds` of the sets, in order of first
/// appearance.
std::vector<std::string> consensus_features(const std::vector<std::vector<std::string>>& per_fold,
                                            std::size_t min_folds = 3);

struct FeatselFold {
  std::size_t fold = 0;
  FeatureRanking ranking;
  ForwardResult forward;
  std::vector<std::string> selected;  // top best_k names
  double test_rmse = 0.0;             // held-out fold with the selected features
  std::size_t boxes = 0;
};

struct FeatselReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string target;
  std::size_t min_folds = 3;
  std::vector<FeatselFold> folds;
  std::vector<std::string> consensus;
};

/// Per outer fold: rank features on the training cultures, forward-select
/// with an inner grouped CV, score the selection on the held-out fold. Then
/// take the cross-fold consensus.
FeatselReport select_features(const SupervisedSet& data, const FoldPlan& plan,
                              const PipelineOptions& options, std::size_t min_folds = 3);

}  // namespace hmr

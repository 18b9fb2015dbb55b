#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hmr {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// One bioreactor run: day indices (strictly increasing, 1-based) and one
/// row of parameter values per day, in the owning dataset's parameter order.
struct CultureSeries {
  std::string culture_id;
  std::vector<int> days;
  std::vector<std::vector<double>> values;

  std::size_t length() const { return days.size(); }
};

struct CultureDataset {
  std::vector<std::string> parameters;
  std::vector<CultureSeries> cultures;

  /// Column index of a parameter; throws DataError when absent.
  std::size_t parameter_index(const std::string& name) const;
  std::size_t day_count() const;
};

/// Header line written ahead of the column names in culture CSV files.
inline constexpr const char* kCultureCsvSchema = "# hmr-cultures/1";

struct LoadOptions {
  /// Fill empty cells from the previous day of the same culture instead of
  /// rejecting them.
  bool carry_forward = false;
};

CultureDataset load_cultures(const std::string& path, const LoadOptions& options = {});
CultureDataset read_cultures(std::istream& in, const LoadOptions& options = {});
void write_cultures(const CultureDataset& data, std::ostream& out);
void save_cultures(const CultureDataset& data, const std::string& path);

/// Design matrix and targets built from culture series for one horizon.
/// Row h holds the inputs observed on `days[h]` of `cultures[h]`.
struct SupervisedSet {
  Matrix inputs;
  Vector targets;
  std::vector<std::string> cultures;
  std::vector<int> days;
  std::vector<std::string> feature_names;
  std::string target_name;
  int horizon = 1;

  std::size_t rows() const { return static_cast<std::size_t>(targets.size()); }
  std::size_t features() const { return static_cast<std::size_t>(inputs.cols()); }

  SupervisedSet select_rows(const std::vector<std::size_t>& rows) const;
  SupervisedSet select_features(const std::vector<std::size_t>& columns) const;
};

/// Name given to the appended next-day target column of horizon-2 inputs.
std::string intermediate_feature_name(const std::string& target);

struct WindowSpec {
  std::vector<std::string> features;
  std::string target;
  int horizon = 1;
  /// Horizon 2 only: append the target's t+1 value as the last input.
  bool include_intermediate = true;
};

struct WindowResult {
  SupervisedSet set;
  std::vector<std::string> warnings;
};

WindowResult window(const CultureDataset& data, const WindowSpec& spec);

void write_supervised(const SupervisedSet& set, std::ostream& out);

/// Min-max scaling parameters learned from training rows.
struct ScalerParams {
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  double target_min = 0.0;
  double target_max = 1.0;

  static ScalerParams identity(std::size_t features);

  std::size_t features() const { return feature_min.size(); }

  double scale_feature(std::size_t i, double value) const;
  double scale_target(double value) const;
  double unscale_target(double scaled) const;
  Matrix apply(const Matrix& inputs) const;
  Vector apply_target(const Vector& targets) const;

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

ScalerParams fit_scaler(const SupervisedSet& train);

struct SynthOptions {
  std::size_t cultures = 106;
  std::size_t days = 15;
  /// Relative measurement/process noise level.
  double noise = 0.02;
  std::uint64_t seed = 1;
};

/// The 23 process parameters emitted by the bioprocess generator.
const std::vector<std::string>& bioprocess_parameters();

/// Seeded bioprocess-like cultures: logistic growth with a death phase,
/// titer accumulated from integrated viable cell density, and correlated
/// auxiliary measurements.
CultureDataset synthesize(const SynthOptions& options);

/// Seeded benchmark with a piecewise-nonlinear next-day response `y` driven
/// by random-walk inputs `u1`, `u2` and a distractor `u3`.
CultureDataset synthesize_benchmark(const SynthOptions& options);

}  // namespace hmr

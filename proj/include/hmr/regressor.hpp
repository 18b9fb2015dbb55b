#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmr/data.hpp"
#include "hmr/hyperbox.hpp"

namespace hmr {

/// Affine expert attached to one hyperbox: f(x) = slope . x + intercept.
struct LocalExpert {
  std::vector<double> slope;
  double intercept = 0.0;

  friend bool operator==(const LocalExpert&, const LocalExpert&) = default;
};

/// Normalizes memberships to weights summing to one. All-zero input gets
/// uniform weights.
std::vector<double> normalize_memberships(std::span<const double> memberships);

double local_expert(std::span<const double> x, std::span<const double> slope, double intercept);

/// N x L(n+1) matrix whose row h holds, for every box l, the block
/// [z_hl * x_h, z_hl] with z the normalized memberships of sample h.
Matrix assemble_design(const Matrix& samples, std::span<const Hyperbox> boxes,
                       const MembershipParams& params);

/// Minimum-norm least-squares solution of A d = y through the SVD
/// pseudo-inverse; singular values below 1e-10 * sigma_max are dropped.
Vector solve_lso(const Matrix& design, const Vector& targets);

inline constexpr double kSvdRelativeCutoff = 1e-10;

/// Trained hyperbox mixture regressor. Prediction methods are const and may
/// be called concurrently.
class HmrModel {
 public:
  struct Metadata {
    std::vector<std::string> feature_names;
    std::string target_name;
    int horizon = 1;

    friend bool operator==(const Metadata&, const Metadata&) = default;
  };

  /// Untrained model; predictions throw StateError.
  HmrModel() = default;

  HmrModel(std::vector<Hyperbox> boxes, MembershipParams params, std::vector<LocalExpert> experts,
           ScalerParams scaler, ClusterConfig config, Metadata metadata);

  bool trained() const { return !experts_.empty(); }
  std::size_t box_count() const { return boxes_.size(); }
  std::size_t dim() const { return scaler_.features(); }

  const std::vector<Hyperbox>& boxes() const { return boxes_; }
  const MembershipParams& params() const;
  const std::vector<LocalExpert>& experts() const { return experts_; }
  const ScalerParams& scaler() const { return scaler_; }
  const ClusterConfig& config() const { return config_; }
  const Metadata& metadata() const { return metadata_; }

  /// Coefficients flattened as [d_1, r_1, ..., d_L, r_L].
  Vector coefficients() const;

  /// Layered forward pass on a scaled input; returns a scaled output.
  double predict_scaled(std::span<const double> x_scaled) const;

  /// Scales a raw input, predicts and maps the output back to target units.
  double predict(std::span<const double> x_raw) const;

  Vector predict_scaled(const Matrix& x_scaled) const;

  friend bool operator==(const HmrModel&, const HmrModel&) = default;

 private:
  void require_trained() const;

  std::vector<Hyperbox> boxes_;
  std::optional<MembershipParams> params_;
  std::vector<LocalExpert> experts_;
  ScalerParams scaler_;
  ClusterConfig config_;
  Metadata metadata_;
};

/// Clusters scaled inputs, assembles the design matrix and solves for the
/// expert coefficients. The model's scaler is the identity.
HmrModel fit_scaled(const Matrix& x_scaled, const Vector& y_scaled, const ClusterConfig& config,
                    const MembershipParams& params);

/// Learns min-max scaling from `train`, then fits in the scaled space.
HmrModel fit(const SupervisedSet& train, const ClusterConfig& config, const MembershipParams& params);

/// Convenience overload broadcasting a scalar lambda over all features.
HmrModel fit(const SupervisedSet& train, const ClusterConfig& config, double lambda = 1.0);

/// Two-day-ahead chain on a raw input: the first model's output is appended
/// as the last input of the second model.
std::pair<double, double> predict_recursive(const HmrModel& first, const HmrModel& second,
                                            std::span<const double> x_raw);

/// RMSE of the model on a raw set, measured in the model's scaled target space.
double scaled_rmse(const HmrModel& model, const SupervisedSet& set);

inline constexpr const char* kModelSchema = "hmr-model/1";

void write_model(const HmrModel& model, std::ostream& out);
HmrModel read_model(std::istream& in);
void save_model(const HmrModel& model, const std::string& path);
HmrModel load_model(const std::string& path);

}  // namespace hmr

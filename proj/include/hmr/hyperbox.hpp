#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hmr {

/// Axis-aligned box in the scaled feature cube. Points with v <= x <= w
/// receive full membership; outside, membership decays linearly.
class Hyperbox {
 public:
  /// Throws InvalidArgument unless both corners share a dimension >= 1 and
  /// min[i] <= max[i] everywhere.
  Hyperbox(std::vector<double> min, std::vector<double> max);

  /// Degenerate box v = w = x, used to seed a new cluster.
  static Hyperbox point(std::span<const double> x);

  std::size_t dim() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

  bool contains(std::span<const double> x) const;

  /// Grows the box in place so that it contains x.
  void expand_to(std::span<const double> x);

  friend bool operator==(const Hyperbox&, const Hyperbox&) = default;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

/// Per-dimension sensitivity of the membership ramp.
class MembershipParams {
 public:
  explicit MembershipParams(std::vector<double> lambda);
  static MembershipParams uniform(std::size_t dim, double lambda = 1.0);

  std::size_t dim() const { return lambda_.size(); }
  const std::vector<double>& lambda() const { return lambda_; }
  double operator[](std::size_t i) const { return lambda_[i]; }

  friend bool operator==(const MembershipParams&, const MembershipParams&) = default;

 private:
  std::vector<double> lambda_;
};

struct ClusterConfig {
  double theta = 0.3;
  std::size_t top_k = 3;
  double expansion_fraction = 0.6;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;

  friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

/// Clamped ramp: 0 below zero, r*lambda in between, 1 above one.
double ramp(double r, double lambda);

/// Fuzzy membership of x in the box, in [0, 1]; exactly 1 iff contained.
double membership(const Hyperbox& box, std::span<const double> x,
                  const MembershipParams& params);

struct Winner {
  std::size_t index;
  double membership;

  friend bool operator==(const Winner&, const Winner&) = default;
};

/// The min(k, boxes.size()) best boxes for x, by descending membership.
/// Equal memberships keep creation order.
std::vector<Winner> rank_winners(std::span<const Hyperbox> boxes,
                                 std::span<const double> x,
                                 const MembershipParams& params, std::size_t k);

/// Number of dimensions that must satisfy the extent criterion.
std::size_t required_dimensions(std::size_t dim, double expansion_fraction);

bool can_expand(const Hyperbox& box, std::span<const double> x,
                const ClusterConfig& config);

Hyperbox expand(const Hyperbox& box, std::span<const double> x);

/// Single-pass min-max clustering over the rows of a row-major sample
/// buffer (rows * dim values). The order of the rows matters.
std::vector<Hyperbox> cluster(std::span<const double> samples, std::size_t dim,
                              const ClusterConfig& config,
                              const MembershipParams& params);

}  // namespace hmr

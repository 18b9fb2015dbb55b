#include "hmr/hyperbox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmr/error.hpp"

namespace hmr {

namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (expected " +
                          std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

}  // namespace

Hyperbox::Hyperbox(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.empty()) throw InvalidArgument("hyperbox: dimension must be >= 1");
  check_dim(min_.size(), max_.size(), "hyperbox corners");
  for (std::size_t i = 0; i < min_.size(); ++i) {
    if (!std::isfinite(min_[i]) || !std::isfinite(max_[i])) {
      throw InvalidArgument("hyperbox: non-finite corner");
    }
    if (min_[i] > max_[i]) {
      throw InvalidArgument("hyperbox: min exceeds max in dimension " + std::to_string(i));
    }
  }
}

Hyperbox Hyperbox::point(std::span<const double> x) {
  std::vector<double> corner(x.begin(), x.end());
  return Hyperbox(corner, corner);
}

bool Hyperbox::contains(std::span<const double> x) const {
  check_dim(dim(), x.size(), "contains");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < min_[i] || x[i] > max_[i]) return false;
  }
  return true;
}

void Hyperbox::expand_to(std::span<const double> x) {
  check_dim(dim(), x.size(), "expand");
  for (std::size_t i = 0; i < x.size(); ++i) {
    min_[i] = std::min(min_[i], x[i]);
    max_[i] = std::max(max_[i], x[i]);
  }
}

MembershipParams::MembershipParams(std::vector<double> lambda) : lambda_(std::move(lambda)) {
  if (lambda_.empty()) throw InvalidArgument("membership params: empty lambda");
  for (double l : lambda_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InvalidArgument("membership params: every lambda must be finite and > 0");
    }
  }
}

MembershipParams MembershipParams::uniform(std::size_t dim, double lambda) {
  return MembershipParams(std::vector<double>(dim, lambda));
}

void ClusterConfig::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (!(expansion_fraction > 0.0 && expansion_fraction <= 1.0)) {
    throw InvalidArgument("expansion_fraction must lie in (0, 1]");
  }
}

double ramp(double r, double lambda) {
  if (!std::isfinite(r) || !std::isfinite(lambda)) throw InvalidArgument("ramp: non-finite input");
  if (!(lambda > 0.0)) throw InvalidArgument("ramp: lambda must be > 0");
  const double s = r * lambda;
  if (s > 1.0) return 1.0;
  if (s < 0.0) return 0.0;
  return s;
}

double membership(const Hyperbox& box, std::span<const double> x,
                  const MembershipParams& params) {
  check_dim(box.dim(), x.size(), "membership");
  check_dim(box.dim(), params.dim(), "membership params");
  const auto& v = box.min();
  const auto& w = box.max();
  double u = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double above = 1.0 - ramp(x[i] - w[i], params[i]);
    const double below = 1.0 - ramp(v[i] - x[i], params[i]);
    u = std::min(u, std::min(above, below));
  }
  return u;
}

std::vector<Winner> rank_winners(std::span<const Hyperbox> boxes,
                                 std::span<const double> x,
                                 const MembershipParams& params, std::size_t k) {
  if (k < 1) throw InvalidArgument("rank_winners: k must be >= 1");
  std::vector<Winner> all;
  all.reserve(boxes.size());
  for (std::size_t l = 0; l < boxes.size(); ++l) {
    all.push_back({l, membership(boxes[l], x, params)});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Winner& a, const Winner& b) {
                      if (a.membership != b.membership) return a.membership > b.membership;
                      return a.index < b.index;
                    });
  all.resize(take);
  return all;
}

std::size_t required_dimensions(std::size_t dim, double expansion_fraction) {
  // Snap products like 0.6 * 5 = 3.0000000000000004 before taking the ceiling.
  const double raw = expansion_fraction * static_cast<double>(dim);
  const double snapped = std::round(raw);
  const double need = std::abs(raw - snapped) < 1e-9 ? snapped : std::ceil(raw);
  return static_cast<std::size_t>(need);
}

bool can_expand(const Hyperbox& box, std::span<const double> x, const ClusterConfig& config) {
  check_dim(box.dim(), x.size(), "can_expand");
  const auto& v = box.min();
  const auto& w = box.max();
  std::size_t passing = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double extent = std::max(w[i], x[i]) - std::min(v[i], x[i]);
    if (config.theta >= extent) ++passing;
  }
  return passing >= required_dimensions(x.size(), config.expansion_fraction);
}

Hyperbox expand(const Hyperbox& box, std::span<const double> x) {
  Hyperbox grown = box;
  grown.expand_to(x);
  return grown;
}

std::vector<Hyperbox> cluster(std::span<const double> samples, std::size_t dim,
                              const ClusterConfig& config,
                              const MembershipParams& params) {
  config.validate();
  if (dim == 0) throw InvalidArgument("cluster: dimension must be >= 1");
  if (samples.size() % dim != 0) throw InvalidArgument("cluster: sample buffer not a multiple of dim");
  check_dim(dim, params.dim(), "cluster params");

  std::vector<Hyperbox> boxes;
  const std::size_t rows = samples.size() / dim;
  for (std::size_t h = 0; h < rows; ++h) {
    const auto x = samples.subspan(h * dim, dim);
    bool absorbed = false;
    for (const Winner& winner : rank_winners(boxes, x, params, config.top_k)) {
      if (can_expand(boxes[winner.index], x, config)) {
        boxes[winner.index].expand_to(x);
        absorbed = true;
        break;
      }
    }
    if (!absorbed) boxes.push_back(Hyperbox::point(x));
  }
  return boxes;
}

}  // namespace hmr

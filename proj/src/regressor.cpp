#include "hmr/regressor.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "hmr/error.hpp"

namespace hmr {

namespace {

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

std::vector<double> normalize_memberships(std::span<const double> memberships) {
  if (memberships.empty()) throw InvalidArgument("normalize_memberships: empty input");
  double total = 0.0;
  for (double u : memberships) total += u;
  std::vector<double> weights(memberships.size());
  if (total > 0.0) {
    for (std::size_t l = 0; l < memberships.size(); ++l) weights[l] = memberships[l] / total;
  } else {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(memberships.size()));
  }
  return weights;
}

double local_expert(std::span<const double> x, std::span<const double> slope, double intercept) {
  if (x.size() != slope.size()) throw InvalidArgument("local_expert: dimension mismatch");
  double value = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) value += slope[i] * x[i];
  return value;
}

Matrix assemble_design(const Matrix& samples, std::span<const Hyperbox> boxes,
                       const MembershipParams& params) {
  if (boxes.empty()) throw InvalidArgument("assemble_design: no hyperboxes");
  const auto n = static_cast<std::size_t>(samples.cols());
  if (boxes.front().dim() != n || params.dim() != n) {
    throw InvalidArgument("assemble_design: dimension mismatch");
  }
  const auto block = static_cast<Eigen::Index>(n + 1);
  Matrix design(samples.rows(), static_cast<Eigen::Index>(boxes.size()) * block);
  std::vector<double> u(boxes.size());
  for (Eigen::Index h = 0; h < samples.rows(); ++h) {
    const auto x = row_span(samples, h);
    for (std::size_t l = 0; l < boxes.size(); ++l) u[l] = membership(boxes[l], x, params);
    const auto z = normalize_memberships(u);
    for (std::size_t l = 0; l < boxes.size(); ++l) {
      const Eigen::Index offset = static_cast<Eigen::Index>(l) * block;
      for (std::size_t i = 0; i < n; ++i) design(h, offset + static_cast<Eigen::Index>(i)) = z[l] * x[i];
      design(h, offset + block - 1) = z[l];
    }
  }
  return design;
}

Vector solve_lso(const Matrix& design, const Vector& targets) {
  if (design.rows() == 0 || design.cols() == 0) throw InvalidArgument("solve_lso: empty design matrix");
  if (design.rows() != targets.size()) throw InvalidArgument("solve_lso: row count does not match targets");
  if (!design.allFinite() || !targets.allFinite()) throw NumericError("solve_lso: non-finite input");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(design), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("solve_lso: SVD failed to converge");
  svd.setThreshold(kSvdRelativeCutoff);
  Vector solution = svd.solve(targets);
  if (!solution.allFinite()) throw NumericError("solve_lso: non-finite solution");
  return solution;
}

HmrModel::HmrModel(std::vector<Hyperbox> boxes, MembershipParams params,
                   std::vector<LocalExpert> experts, ScalerParams scaler, ClusterConfig config,
                   Metadata metadata)
    : boxes_(std::move(boxes)),
      params_(std::move(params)),
      experts_(std::move(experts)),
      scaler_(std::move(scaler)),
      config_(config),
      metadata_(std::move(metadata)) {
  if (boxes_.empty()) throw InvalidArgument("model: no hyperboxes");
  if (experts_.size() != boxes_.size()) throw InvalidArgument("model: one expert per hyperbox required");
  const std::size_t n = params_->dim();
  if (scaler_.feature_min.size() != n || scaler_.feature_max.size() != n) {
    throw InvalidArgument("model: scaler dimension does not match");
  }
  for (const auto& box : boxes_) {
    if (box.dim() != n) throw InvalidArgument("model: hyperbox dimension does not match");
  }
  for (const auto& e : experts_) {
    if (e.slope.size() != n) throw InvalidArgument("model: expert dimension does not match");
  }
  if (!metadata_.feature_names.empty() && metadata_.feature_names.size() != n) {
    throw InvalidArgument("model: feature name count does not match");
  }
  config_.validate();
}

const MembershipParams& HmrModel::params() const {
  require_trained();
  return *params_;
}

void HmrModel::require_trained() const {
  if (!trained()) throw StateError("model is not trained");
}

Vector HmrModel::coefficients() const {
  const std::size_t block = dim() + 1;
  Vector d(static_cast<Eigen::Index>(experts_.size() * block));
  for (std::size_t l = 0; l < experts_.size(); ++l) {
    for (std::size_t i = 0; i < dim(); ++i) d(static_cast<Eigen::Index>(l * block + i)) = experts_[l].slope[i];
    d(static_cast<Eigen::Index>(l * block + dim())) = experts_[l].intercept;
  }
  return d;
}

double HmrModel::predict_scaled(std::span<const double> x_scaled) const {
  require_trained();
  if (x_scaled.size() != dim()) {
    throw InvalidArgument("predict: expected " + std::to_string(dim()) + " features, got " +
                          std::to_string(x_scaled.size()));
  }
  std::vector<double> u(boxes_.size());
  for (std::size_t l = 0; l < boxes_.size(); ++l) u[l] = membership(boxes_[l], x_scaled, *params_);
  const auto z = normalize_memberships(u);
  double y = 0.0;
  for (std::size_t l = 0; l < experts_.size(); ++l) {
    y += z[l] * local_expert(x_scaled, experts_[l].slope, experts_[l].intercept);
  }
  return y;
}

double HmrModel::predict(std::span<const double> x_raw) const {
  require_trained();
  if (x_raw.size() != dim()) {
    throw InvalidArgument("predict: expected " + std::to_string(dim()) + " features, got " +
                          std::to_string(x_raw.size()));
  }
  std::vector<double> x(x_raw.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = scaler_.scale_feature(i, x_raw[i]);
  return scaler_.unscale_target(predict_scaled(x));
}

Vector HmrModel::predict_scaled(const Matrix& x_scaled) const {
  Vector out(x_scaled.rows());
  for (Eigen::Index h = 0; h < x_scaled.rows(); ++h) out(h) = predict_scaled(row_span(x_scaled, h));
  return out;
}

HmrModel fit_scaled(const Matrix& x_scaled, const Vector& y_scaled, const ClusterConfig& config,
                    const MembershipParams& params) {
  config.validate();
  if (x_scaled.rows() == 0) throw InvalidArgument("fit: empty training set");
  if (x_scaled.rows() != y_scaled.size()) throw InvalidArgument("fit: input and target row counts differ");
  const auto n = static_cast<std::size_t>(x_scaled.cols());
  if (params.dim() != n) throw InvalidArgument("fit: lambda dimension does not match features");
  if (!x_scaled.allFinite() || !y_scaled.allFinite()) throw NumericError("fit: non-finite training data");

  auto boxes = cluster({x_scaled.data(), static_cast<std::size_t>(x_scaled.size())}, n, config, params);
  const Matrix design = assemble_design(x_scaled, boxes, params);
  const Vector d = solve_lso(design, y_scaled);

  std::vector<LocalExpert> experts(boxes.size());
  for (std::size_t l = 0; l < boxes.size(); ++l) {
    const auto offset = static_cast<Eigen::Index>(l * (n + 1));
    experts[l].slope.assign(d.data() + offset, d.data() + offset + static_cast<Eigen::Index>(n));
    experts[l].intercept = d(offset + static_cast<Eigen::Index>(n));
  }
  return HmrModel(std::move(boxes), params, std::move(experts), ScalerParams::identity(n), config, {});
}

HmrModel fit(const SupervisedSet& train, const ClusterConfig& config, const MembershipParams& params) {
  if (train.rows() == 0) throw InvalidArgument("fit: empty training set");
  const ScalerParams scaler = fit_scaler(train);
  const HmrModel core = fit_scaled(scaler.apply(train.inputs), scaler.apply_target(train.targets), config, params);
  return HmrModel(core.boxes(), core.params(), core.experts(), scaler, config,
                  {train.feature_names, train.target_name, train.horizon});
}

HmrModel fit(const SupervisedSet& train, const ClusterConfig& config, double lambda) {
  return fit(train, config, MembershipParams::uniform(train.features(), lambda));
}

std::pair<double, double> predict_recursive(const HmrModel& first, const HmrModel& second,
                                            std::span<const double> x_raw) {
  if (second.dim() != first.dim() + 1) {
    throw InvalidArgument("predict_recursive: second model expects " + std::to_string(second.dim()) +
                          " features, first model provides " + std::to_string(first.dim()) + " + 1");
  }
  const double next = first.predict(x_raw);
  std::vector<double> chained(x_raw.begin(), x_raw.end());
  chained.push_back(next);
  return {next, second.predict(chained)};
}

double scaled_rmse(const HmrModel& model, const SupervisedSet& set) {
  if (set.rows() == 0) throw InvalidArgument("rmse: empty set");
  const Matrix x = model.scaler().apply(set.inputs);
  const Vector y = model.scaler().apply_target(set.targets);
  const Vector yhat = model.predict_scaled(x);
  return std::sqrt((yhat - y).squaredNorm() / static_cast<double>(set.rows()));
}

}  // namespace hmr

#include "hmr/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "format.hpp"
#include "hmr/error.hpp"

namespace hmr {

using detail::format_double;

std::size_t CultureDataset::parameter_index(const std::string& name) const {
  const auto it = std::find(parameters.begin(), parameters.end(), name);
  if (it == parameters.end()) throw DataError("unknown parameter '" + name + "'");
  return static_cast<std::size_t>(it - parameters.begin());
}

std::size_t CultureDataset::day_count() const {
  std::size_t total = 0;
  for (const auto& c : cultures) total += c.length();
  return total;
}

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

struct PendingDay {
  int day;
  std::size_t line;
  std::vector<double> values;  // NaN marks a missing cell
};

}  // namespace

CultureDataset read_cultures(std::istream& in, const LoadOptions& options) {
  CultureDataset data;
  std::vector<std::string> order;
  std::map<std::string, std::vector<PendingDay>> pending;

  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');

    if (!have_header) {
      if (cells.size() < 2 || detail::trim(cells[0]) != "culture_id" || detail::trim(cells[1]) != "day") {
        throw DataError(at_line(line_no) + "header must start with 'culture_id,day'");
      }
      if (cells.size() < 3) throw DataError(at_line(line_no) + "header has no parameter columns");
      for (std::size_t i = 2; i < cells.size(); ++i) {
        std::string name(detail::trim(cells[i]));
        if (name.empty()) throw DataError(at_line(line_no) + "empty column name");
        if (std::find(data.parameters.begin(), data.parameters.end(), name) != data.parameters.end()) {
          throw DataError(at_line(line_no) + "duplicate column '" + name + "'");
        }
        data.parameters.push_back(std::move(name));
      }
      have_header = true;
      continue;
    }

    if (cells.size() != data.parameters.size() + 2) {
      throw DataError(at_line(line_no) + "expected " + std::to_string(data.parameters.size() + 2) +
                      " columns, found " + std::to_string(cells.size()));
    }
    std::string culture(detail::trim(cells[0]));
    if (culture.empty()) throw DataError(at_line(line_no) + "empty culture_id");
    const auto day_value = detail::parse_double(cells[1]);
    if (!day_value || *day_value < 1.0 || *day_value != std::floor(*day_value) ||
        *day_value > std::numeric_limits<int>::max()) {
      throw DataError(at_line(line_no) + "day must be a positive integer, got '" +
                      std::string(detail::trim(cells[1])) + "'");
    }
    PendingDay record{static_cast<int>(*day_value), line_no, {}};
    record.values.reserve(data.parameters.size());
    for (std::size_t i = 2; i < cells.size(); ++i) {
      const auto cell = detail::trim(cells[i]);
      if (cell.empty()) {
        if (!options.carry_forward) {
          throw DataError(at_line(line_no) + "missing value for '" + data.parameters[i - 2] + "'");
        }
        record.values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto value = detail::parse_double(cell);
      if (!value) {
        throw DataError(at_line(line_no) + "non-numeric value '" + std::string(cell) + "' for '" +
                        data.parameters[i - 2] + "'");
      }
      record.values.push_back(*value);
    }

    auto [it, inserted] = pending.try_emplace(culture);
    if (inserted) order.push_back(culture);
    for (const auto& prior : it->second) {
      if (prior.day == record.day) {
        throw DataError(at_line(line_no) + "duplicate day " + std::to_string(record.day) +
                        " for culture '" + culture + "' (first seen on line " +
                        std::to_string(prior.line) + ")");
      }
    }
    it->second.push_back(std::move(record));
  }
  if (!have_header) throw DataError("culture file has no header line");

  for (const auto& id : order) {
    auto& days = pending[id];
    std::sort(days.begin(), days.end(),
              [](const PendingDay& a, const PendingDay& b) { return a.day < b.day; });
    CultureSeries series;
    series.culture_id = id;
    for (std::size_t d = 0; d < days.size(); ++d) {
      for (std::size_t p = 0; p < days[d].values.size(); ++p) {
        if (!std::isnan(days[d].values[p])) continue;
        if (d == 0) {
          throw DataError(at_line(days[d].line) + "missing value for '" + data.parameters[p] +
                          "' on the first day of culture '" + id + "' cannot be carried forward");
        }
        days[d].values[p] = series.values.back()[p];
      }
      series.days.push_back(days[d].day);
      series.values.push_back(std::move(days[d].values));
    }
    data.cultures.push_back(std::move(series));
  }
  return data;
}

CultureDataset load_cultures(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_cultures(in, options);
}

void write_cultures(const CultureDataset& data, std::ostream& out) {
  out << kCultureCsvSchema << '\n' << "culture_id,day";
  for (const auto& p : data.parameters) out << ',' << p;
  out << '\n';
  for (const auto& c : data.cultures) {
    for (std::size_t d = 0; d < c.length(); ++d) {
      out << c.culture_id << ',' << c.days[d];
      for (double v : c.values[d]) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void save_cultures(const CultureDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_cultures(data, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

SupervisedSet SupervisedSet::select_rows(const std::vector<std::size_t>& rows) const {
  SupervisedSet out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(src);
    out.targets(static_cast<Eigen::Index>(r)) = targets(src);
    out.cultures.push_back(cultures[rows[r]]);
    out.days.push_back(days[rows[r]]);
  }
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.horizon = horizon;
  return out;
}

SupervisedSet SupervisedSet::select_features(const std::vector<std::size_t>& columns) const {
  SupervisedSet out;
  out.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= features()) throw InvalidArgument("select_features: column out of range");
    out.inputs.col(static_cast<Eigen::Index>(c)) = inputs.col(static_cast<Eigen::Index>(columns[c]));
    out.feature_names.push_back(feature_names[columns[c]]);
  }
  out.targets = targets;
  out.cultures = cultures;
  out.days = days;
  out.target_name = target_name;
  out.horizon = horizon;
  return out;
}

std::string intermediate_feature_name(const std::string& target) { return target + "(t+1)"; }

WindowResult window(const CultureDataset& data, const WindowSpec& spec) {
  if (spec.horizon != 1 && spec.horizon != 2) throw InvalidArgument("horizon must be 1 or 2");
  if (spec.features.empty()) throw InvalidArgument("window: no input features requested");
  std::vector<std::size_t> columns;
  for (const auto& f : spec.features) columns.push_back(data.parameter_index(f));
  const std::size_t target_col = data.parameter_index(spec.target);
  const bool intermediate = spec.horizon == 2 && spec.include_intermediate;
  const auto h = static_cast<std::size_t>(spec.horizon);

  WindowResult result;
  auto& set = result.set;
  set.feature_names = spec.features;
  if (intermediate) set.feature_names.push_back(intermediate_feature_name(spec.target));
  set.target_name = spec.target;
  set.horizon = spec.horizon;

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  for (const auto& c : data.cultures) {
    if (c.length() < h + 1) {
      result.warnings.push_back("culture '" + c.culture_id + "' skipped: " + std::to_string(c.length()) +
                                " day(s), horizon " + std::to_string(h) + " needs at least " +
                                std::to_string(h + 1));
      continue;
    }
    for (std::size_t j = 0; j + h < c.length(); ++j) {
      if (c.days[j + h] != c.days[j] + spec.horizon ||
          (intermediate && c.days[j + 1] != c.days[j] + 1)) {
        result.warnings.push_back("culture '" + c.culture_id + "' day " + std::to_string(c.days[j]) +
                                  " skipped: gap in day sequence");
        continue;
      }
      std::vector<double> row;
      row.reserve(set.feature_names.size());
      for (std::size_t col : columns) row.push_back(c.values[j][col]);
      if (intermediate) row.push_back(c.values[j + 1][target_col]);
      rows.push_back(std::move(row));
      targets.push_back(c.values[j + h][target_col]);
      set.cultures.push_back(c.culture_id);
      set.days.push_back(c.days[j]);
    }
  }

  set.inputs.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(set.feature_names.size()));
  set.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < rows[r].size(); ++k) {
      set.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
    }
    set.targets(static_cast<Eigen::Index>(r)) = targets[r];
  }
  return result;
}

void write_supervised(const SupervisedSet& set, std::ostream& out) {
  out << "culture_id,day";
  for (const auto& f : set.feature_names) out << ',' << f;
  out << ',' << set.target_name << "(t+" << set.horizon << ")\n";
  for (std::size_t r = 0; r < set.rows(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out << set.cultures[r] << ',' << set.days[r];
    for (Eigen::Index k = 0; k < set.inputs.cols(); ++k) out << ',' << format_double(set.inputs(row, k));
    out << ',' << format_double(set.targets(row)) << '\n';
  }
}

ScalerParams ScalerParams::identity(std::size_t features) {
  ScalerParams p;
  p.feature_min.assign(features, 0.0);
  p.feature_max.assign(features, 1.0);
  return p;
}

namespace {

double scale_value(double value, double lo, double hi) {
  if (hi == lo) return 0.0;
  return (value - lo) / (hi - lo);
}

}  // namespace

double ScalerParams::scale_feature(std::size_t i, double value) const {
  return scale_value(value, feature_min.at(i), feature_max.at(i));
}

double ScalerParams::scale_target(double value) const {
  return scale_value(value, target_min, target_max);
}

double ScalerParams::unscale_target(double scaled) const {
  return scaled * (target_max - target_min) + target_min;
}

Matrix ScalerParams::apply(const Matrix& inputs) const {
  if (static_cast<std::size_t>(inputs.cols()) != features()) {
    throw InvalidArgument("scaler: expected " + std::to_string(features()) + " features, got " +
                          std::to_string(inputs.cols()));
  }
  Matrix out(inputs.rows(), inputs.cols());
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
      out(r, c) = scale_feature(static_cast<std::size_t>(c), inputs(r, c));
    }
  }
  return out;
}

Vector ScalerParams::apply_target(const Vector& targets) const {
  Vector out(targets.size());
  for (Eigen::Index r = 0; r < targets.size(); ++r) out(r) = scale_target(targets(r));
  return out;
}

ScalerParams fit_scaler(const SupervisedSet& train) {
  if (train.rows() == 0) throw InvalidArgument("fit_scaler: empty training set");
  ScalerParams p;
  for (Eigen::Index c = 0; c < train.inputs.cols(); ++c) {
    p.feature_min.push_back(train.inputs.col(c).minCoeff());
    p.feature_max.push_back(train.inputs.col(c).maxCoeff());
  }
  p.target_min = train.targets.minCoeff();
  p.target_max = train.targets.maxCoeff();
  return p;
}

}  // namespace hmr

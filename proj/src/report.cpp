#include "hmr/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "format.hpp"

namespace hmr {

namespace {

using Json = nlohmann::ordered_json;
using detail::format_double;

Json config_json(const ReportContext& context) {
  Json config = Json::object();
  for (const auto& [key, value] : context.config) config[key] = value;
  return config;
}

Json summary_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

Json fold_json(const FoldResult& f, bool timings) {
  Json j = {{"fold", f.fold},           {"theta", f.theta},           {"train_rmse", f.train_rmse},
            {"test_rmse", f.test_rmse}, {"boxes", f.boxes},           {"train_rows", f.train_rows},
            {"test_rows", f.test_rows}, {"features", f.features}};
  if (timings) j["seconds"] = f.seconds;
  return j;
}

Json cv_json(const CvReport& report, bool timings) {
  Json folds = Json::array();
  for (const auto& f : report.folds) folds.push_back(fold_json(f, timings));
  return {{"k", report.k},
          {"seed", report.seed},
          {"target", report.target},
          {"horizon", report.horizon},
          {"folds", std::move(folds)},
          {"aggregate",
           {{"train_rmse", summary_json(report.train_rmse())},
            {"test_rmse", summary_json(report.test_rmse())},
            {"boxes", summary_json(report.boxes())}}}};
}

Json grid_json(const GridResult& result, bool timings) {
  Json points = Json::array();
  for (const auto& p : result.points) {
    points.push_back({{"theta", p.theta},
                      {"validation_rmse", summary_json(p.report.test_rmse())},
                      {"boxes", summary_json(p.report.boxes())},
                      {"report", cv_json(p.report, timings)}});
  }
  return {{"best_theta", result.best_theta}, {"points", std::move(points)}};
}

Json document(const ReportContext& context) {
  return {{"command", context.command}, {"config", config_json(context)}};
}

std::string fixed(double value, int digits = 6) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

void text_header(std::ostringstream& out, const ReportContext& context) {
  out << "# " << context.command << '\n';
  for (const auto& [key, value] : context.config) out << "# " << key << " = " << value << '\n';
}

void text_cv_table(std::ostringstream& out, const CvReport& report, bool timings) {
  out << std::left << std::setw(8) << "fold" << std::setw(8) << "theta" << std::setw(14) << "train_rmse"
      << std::setw(14) << "test_rmse" << std::setw(8) << "boxes" << std::setw(8) << "train" << std::setw(8)
      << "test";
  if (timings) out << "seconds";
  out << '\n';
  for (const auto& f : report.folds) {
    out << std::setw(8) << f.fold << std::setw(8) << fixed(f.theta, 2) << std::setw(14) << fixed(f.train_rmse)
        << std::setw(14) << fixed(f.test_rmse) << std::setw(8) << f.boxes << std::setw(8) << f.train_rows
        << std::setw(8) << f.test_rows;
    if (timings) out << fixed(f.seconds, 3);
    out << '\n';
  }
  const auto train = report.train_rmse();
  const auto test = report.test_rmse();
  const auto boxes = report.boxes();
  out << std::setw(8) << "mean" << std::setw(8) << "-" << std::setw(14) << fixed(train.mean) << std::setw(14)
      << fixed(test.mean) << std::setw(8) << fixed(boxes.mean, 1) << '\n';
  out << "test rmse " << fixed(test.mean) << " +- " << fixed(test.std) << ", boxes " << fixed(boxes.mean, 1)
      << " +- " << fixed(boxes.std, 1) << '\n';
}

void table_header(std::ostringstream& out, bool timings) {
  out << "config,theta,fold,train_rmse,test_rmse,boxes,train_rows,test_rows";
  if (timings) out << ",seconds";
  out << '\n';
}

void table_rows(std::ostringstream& out, const std::string& config, const CvReport& report, bool timings) {
  for (const auto& f : report.folds) {
    out << config << ',' << format_double(f.theta) << ',' << f.fold << ',' << format_double(f.train_rmse) << ','
        << format_double(f.test_rmse) << ',' << f.boxes << ',' << f.train_rows << ',' << f.test_rows;
    if (timings) out << ',' << format_double(f.seconds);
    out << '\n';
  }
  out << config << ",," << "mean" << ',' << format_double(report.train_rmse().mean) << ','
      << format_double(report.test_rmse().mean) << ',' << format_double(report.boxes().mean) << ",,";
  if (timings) out << ',';
  out << '\n';
}

}  // namespace

std::string render(const CvReport& report, const ReportContext& context, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      Json doc = document(context);
      doc["report"] = cv_json(report, context.include_timings);
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Table:
      table_header(out, context.include_timings);
      table_rows(out, "cv", report, context.include_timings);
      break;
    case ReportFormat::Text:
      text_header(out, context);
      text_cv_table(out, report, context.include_timings);
      break;
  }
  return out.str();
}

std::string render(const TunedCvReport& report, const ReportContext& context, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      Json doc = document(context);
      doc["report"] = cv_json(report.report, context.include_timings);
      Json inner = Json::array();
      for (const auto& f : report.folds) inner.push_back(grid_json(f.grid, context.include_timings));
      doc["inner_grids"] = std::move(inner);
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Table:
      table_header(out, context.include_timings);
      table_rows(out, "tuned", report.report, context.include_timings);
      break;
    case ReportFormat::Text:
      text_header(out, context);
      text_cv_table(out, report.report, context.include_timings);
      out << "selected theta per fold:";
      for (const auto& f : report.folds) out << ' ' << fixed(f.grid.best_theta, 2);
      out << '\n';
      break;
  }
  return out.str();
}

std::string render(const GridResult& result, const ReportContext& context, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      Json doc = document(context);
      doc["grid"] = grid_json(result, context.include_timings);
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Table:
      table_header(out, context.include_timings);
      for (std::size_t g = 0; g < result.points.size(); ++g) {
        table_rows(out, "grid" + std::to_string(g), result.points[g].report, context.include_timings);
      }
      break;
    case ReportFormat::Text:
      text_header(out, context);
      out << std::left << std::setw(8) << "theta" << std::setw(16) << "val_rmse" << std::setw(14) << "val_std"
          << "boxes" << '\n';
      for (const auto& p : result.points) {
        out << std::setw(8) << fixed(p.theta, 2) << std::setw(16) << fixed(p.report.test_rmse().mean)
            << std::setw(14) << fixed(p.report.test_rmse().std) << fixed(p.report.boxes().mean, 1) << '\n';
      }
      out << "best theta " << fixed(result.best_theta, 2) << '\n';
      break;
  }
  return out.str();
}

std::string render(const FeatselReport& report, const ReportContext& context, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      Json doc = document(context);
      Json folds = Json::array();
      for (const auto& f : report.folds) {
        Json ranking = Json::array();
        for (const auto& r : f.ranking) ranking.push_back({{"feature", r.name}, {"correlation", r.correlation}});
        folds.push_back({{"fold", f.fold},
                         {"ranking", std::move(ranking)},
                         {"curve", f.forward.curve},
                         {"curve_std", f.forward.curve_std},
                         {"best_k", f.forward.best_k},
                         {"selected", f.selected},
                         {"test_rmse", f.test_rmse},
                         {"boxes", f.boxes}});
      }
      doc["report"] = {{"k", report.k},
                       {"seed", report.seed},
                       {"target", report.target},
                       {"min_folds", report.min_folds},
                       {"folds", std::move(folds)},
                       {"consensus", report.consensus}};
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Table:
      out << "fold,k,feature,correlation,val_rmse,val_std\n";
      for (const auto& f : report.folds) {
        for (std::size_t i = 0; i < f.ranking.size(); ++i) {
          out << f.fold << ',' << i + 1 << ',' << f.ranking[i].name << ',' << format_double(f.ranking[i].correlation)
              << ',' << format_double(f.forward.curve[i]) << ',' << format_double(f.forward.curve_std[i]) << '\n';
        }
      }
      break;
    case ReportFormat::Text:
      text_header(out, context);
      for (const auto& f : report.folds) {
        out << "fold " << f.fold << " ranking:";
        for (const auto& r : f.ranking) out << ' ' << r.name << '(' << fixed(r.correlation, 2) << ')';
        out << "\nfold " << f.fold << " validation rmse by k:";
        for (double v : f.forward.curve) out << ' ' << fixed(v);
        out << "\nfold " << f.fold << " best k " << f.forward.best_k << ", test rmse " << fixed(f.test_rmse)
            << ", boxes " << f.boxes << '\n';
      }
      out << "consensus (>= " << report.min_folds << " folds):";
      for (const auto& name : report.consensus) out << ' ' << name;
      out << '\n';
      break;
  }
  return out.str();
}

}  // namespace hmr

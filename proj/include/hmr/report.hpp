#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hmr/selection.hpp"

namespace hmr {

enum class ReportFormat { Text, Json, Table };

/// Resolved run configuration echoed into every report, plus whether the
/// wall-clock columns are included. Timings are off by default so that
/// reports of identical runs compare byte for byte.
struct ReportContext {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  bool include_timings = false;
};

std::string render(const CvReport& report, const ReportContext& context, ReportFormat format);
std::string render(const TunedCvReport& report, const ReportContext& context, ReportFormat format);
std::string render(const GridResult& result, const ReportContext& context, ReportFormat format);
std::string render(const FeatselReport& report, const ReportContext& context, ReportFormat format);

}  // namespace hmr

#pragma once

// JSON and aligned plain-text renderings of evaluation results. Tables follow
// the layout of the usual results tables: one column per variant (metric
// rows), one column per held-out item (cold start), train/CV timing rows.

#include "lnn/eval.hpp"

#include <span>
#include <string>
#include <vector>

namespace lnn {

enum class ReportFormat { text, json };
ReportFormat report_format_from_string(const std::string& name);

std::string config_summary(const TrainConfig& config);

std::string metrics_json(std::span<const MetricRow> rows, bool include_timing = true);
/// Rows grouped by split, columns by variant.
std::string metrics_table(std::span<const MetricRow> rows);
/// Wall-clock seconds per variant: "train" rows from holdout, "Ave <k>CV" from CV.
std::string timing_table(std::span<const MetricRow> rows);

std::string grid_json(const GridResult& result);
std::string grid_table(const GridResult& result);

std::string cv_json(const CvReport& report);

std::string coldstart_json(std::span<const ColdStartReport> reports);
std::string coldstart_table(std::span<const ColdStartReport> reports);

} // namespace lnn

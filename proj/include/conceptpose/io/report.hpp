/**
 * @file report.hpp
 * @brief JSON and text dataset reports.
 *
 * Non-finite errors (missing estimates) are written as null and read back
 * as +infinity, so aggregates recompute exactly from the records.
 */
#pragma once

#include <conceptpose/concept_selection.hpp>
#include <conceptpose/metrics.hpp>
#include <conceptpose/pipeline.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace conceptpose::io {

struct ReportRecord {
  std::string pair_id;
  std::string object_id;
  CaseOutcome outcome;
  PairEvaluation evaluation;
};

struct ReportDocument {
  std::vector<ReportRecord> records;
  DatasetAggregates aggregates;
};

std::string estimate_json(const PipelineResult& result, bool include_timings, int indent = 2);
std::string report_json(const ReportDocument& report, int indent = 2);
ReportDocument parse_report_json(const std::string& text);
void write_report_text(std::ostream& os, const ReportDocument& report);

}  // namespace conceptpose::io

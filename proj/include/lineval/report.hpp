#pragma once

#include <string>

#include "json.hpp"

namespace lineval {

enum class ReportFormat { Json, Csv };

// An evaluation report: one document with a "metadata" object carrying the
// complete effective configuration and a "results" object with the metric
// values. Serialization is deterministic: field order is insertion order and
// numbers use shortest round-trip formatting, so identical runs produce
// byte-identical files.
struct Report {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();

  nlohmann::ordered_json& metadata() { return doc["metadata"]; }
  nlohmann::ordered_json& results() { return doc["results"]; }
};

ReportFormat parse_report_format(const std::string& name);

// JSON: the document itself. CSV: a two-column key,value table where keys are
// slash-separated paths into the document and values are JSON-encoded leaves.
// Both encode identical values and read_report inverts either exactly.
void write_report(const Report& report, const std::string& path,
                  ReportFormat format);
std::string render_report(const Report& report, ReportFormat format);
Report read_report(const std::string& path, ReportFormat format);

}  // namespace lineval

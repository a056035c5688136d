#include "lineval/report.hpp"

#include <fstream>
#include <utility>
#include <vector>

#include "lineval/errors.hpp"

namespace lineval {
namespace {

using nlohmann::ordered_json;

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

// Depth-first (key, leaf) pairs. Empty containers are leaves themselves so
// the inverse reconstructs them; nlohmann's own flatten drops them.
void flatten(const ordered_json& node, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object() && !node.empty()) {
    for (const auto& [key, value] : node.items()) {
      if (!valid_key(key))
        throw InputError("report key '" + key + "' not representable in csv");
      flatten(value, prefix + "/" + key, out);
    }
  } else if (node.is_array() && !node.empty()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      flatten(node[i], prefix + "/" + std::to_string(i), out);
  } else {
    out.emplace_back(prefix, node.dump());
  }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw InputError("unknown report format '" + name +
                   "' (expected json or csv)");
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report.doc.dump(2) + "\n";

  std::vector<std::pair<std::string, std::string>> rows;
  flatten(report.doc, "", rows);
  std::string out = "key,value\n";
  for (const auto& [key, value] : rows) {
    out += key;
    out += ',';
    out += value;
    out += '\n';
  }
  return out;
}

void write_report(const Report& report, const std::string& path,
                  ReportFormat format) {
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError(path + ": write failed");
}

Report read_report(const std::string& path, ReportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");

  Report report;
  if (format == ReportFormat::Json) {
    try {
      report.doc = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
      throw InputError(path + ": " + e.what());
    }
    return report;
  }

  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (number == 1) {
      if (line != "key,value")
        throw InputError(path + ": expected 'key,value' header");
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError(path + ":" + std::to_string(number) +
                       ": expected 'key,value' row");
    const std::string key = line.substr(0, comma);
    ordered_json value;
    try {
      value = ordered_json::parse(line.substr(comma + 1));
    } catch (const ordered_json::parse_error& e) {
      throw InputError(path + ":" + std::to_string(number) + ": " + e.what());
    }
    try {
      report.doc[ordered_json::json_pointer(key)] = std::move(value);
    } catch (const ordered_json::exception& e) {
      throw InputError(path + ":" + std::to_string(number) + ": bad key '" +
                       key + "': " + e.what());
    }
  }
  return report;
}

}  // namespace lineval

#pragma once

// Comparison rows and their CSV/JSON rendering.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wrrnoc/errors.hpp"

#ifndef WRRNOC_GIT_REVISION
#define WRRNOC_GIT_REVISION "unknown"
#endif

namespace wrrnoc {

struct ComparisonRow {
  std::string scenario;
  double lambda = 0.0;
  double p_burst = 0.0;
  int w_ring = 1;
  int w_src = 1;
  std::optional<double> analytic;  // empty when saturated or not requested
  std::optional<double> sim;
  bool saturated = false;
  std::string error;  // per-point failure other than saturation

  /// |analytic - sim| / sim, when both are present.
  std::optional<double> rel_error() const {
    if (!analytic || !sim || !(*sim > 0.0)) return std::nullopt;
    return std::abs(*analytic - *sim) / *sim;
  }
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string command;
  std::string started;  // ISO-8601 UTC
  std::string finished;
  std::vector<std::string> notes;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "scenario,lambda,p_burst,w_ring,w_src,analytic_latency,sim_latency,rel_error,saturated";

inline void write_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_field(r.scenario) << ',' << detail::fmt(r.lambda, "%.6g") << ','
        << detail::fmt(r.p_burst, "%.6g") << ',' << r.w_ring << ',' << r.w_src << ',';
    if (r.analytic) out << detail::fmt(*r.analytic, "%.4f");
    out << ',';
    if (r.sim) out << detail::fmt(*r.sim, "%.4f");
    out << ',';
    if (auto e = r.rel_error()) out << detail::fmt(*e, "%.3f");
    out << ',' << (r.saturated ? "true" : "false") << '\n';
  }
}

inline nlohmann::json report_json(std::span<const ComparisonRow> rows, const RunMetadata& meta) {
  using json = nlohmann::json;
  json arr = json::array();
  for (const auto& r : rows) {
    json j = {{"scenario", r.scenario}, {"lambda", r.lambda}, {"p_burst", r.p_burst},
              {"w_ring", r.w_ring},     {"w_src", r.w_src},   {"saturated", r.saturated}};
    j["analytic_latency"] = r.analytic ? json(*r.analytic) : json(nullptr);
    j["sim_latency"] = r.sim ? json(*r.sim) : json(nullptr);
    const auto e = r.rel_error();
    j["rel_error"] = e ? json(*e) : json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  json m = {{"seed", meta.seed},
            {"git_revision", WRRNOC_GIT_REVISION},
            {"started", meta.started},
            {"finished", meta.finished}};
  if (!meta.command.empty()) m["command"] = meta.command;
  if (!meta.notes.empty()) m["notes"] = meta.notes;
  return {{"metadata", m}, {"rows", arr}};
}

/// Writes rows to `path` ("-" or empty: `fallback`). Throws on an empty row
/// set or an unwritable path.
inline void emit_report(std::span<const ComparisonRow> rows, const std::string& format,
                        const std::string& path, const RunMetadata& meta = {},
                        std::ostream* fallback = nullptr) {
  if (rows.empty()) throw InvalidArgument("emit_report: no rows");
  if (format != "csv" && format != "json")
    throw InvalidArgument("emit_report: unknown format '" + format + "'");
  std::ostringstream body;
  if (format == "csv") write_csv(body, rows);
  else body << report_json(rows, meta).dump(2) << '\n';

  if (path.empty() || path == "-") {
    if (!fallback) throw InvalidArgument("emit_report: no output path");
    *fallback << body.str();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report to '" + path + "'");
  out << body.str();
  if (!out) throw Error("failed writing report to '" + path + "'");
}

}  // namespace wrrnoc

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dropkit/loss_audit.hpp"

// Per-phase measurement reports: one row per step, machine-readable (CSV
// and JSON) and printable as a human table. Every row is backed by an
// audit snapshot of the step it describes.

namespace dropkit {

struct PhaseRow {
  // ordered step parameters, e.g. {"streams","2"} or {"payload","257"}
  std::vector<std::pair<std::string, std::string>> parameters;
  double packet_rate_pps = 0;
  double data_rate_bps = 0;
  std::uint64_t packets_received = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t loss_events = 0;
  std::uint64_t packets_missing = 0;
  double upper_limit_ratio = 0;  // loss ratio, or the zero-loss upper limit
  bool pass = true;
  std::string note;

  std::string parameter(const std::string& key) const;
};

struct PhaseReport {
  std::string phase;
  std::vector<PhaseRow> rows;
  std::vector<AuditReport> final_audits;  // per-stream, last step
  bool pass = true;
  std::string summary;

  std::string to_csv() const;
  std::string to_json() const;
  std::string to_table() const;
};

void write_file(const std::string& path, const std::string& content);

}  // namespace dropkit

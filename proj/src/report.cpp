#include "dropkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dropkit {

std::string PhaseRow::parameter(const std::string& key) const {
  for (const auto& [k, v] : parameters)
    if (k == key) return v;
  return {};
}

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<std::string> parameter_columns(const std::vector<PhaseRow>& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (const auto& [k, _] : r.parameters)
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  return cols;
}
}  // namespace

std::string PhaseReport::to_csv() const {
  std::ostringstream os;
  const auto cols = parameter_columns(rows);
  for (const auto& c : cols) os << c << ",";
  os << "packet_rate_pps,data_rate_bps,packets_received,bytes_received,"
        "loss_events,packets_missing,upper_limit_ratio,pass,note\n";
  for (const auto& r : rows) {
    for (const auto& c : cols) os << r.parameter(c) << ",";
    os << fmt_double(r.packet_rate_pps) << "," << fmt_double(r.data_rate_bps) << ","
       << r.packets_received << "," << r.bytes_received << "," << r.loss_events << ","
       << r.packets_missing << "," << fmt_double(r.upper_limit_ratio) << ","
       << (r.pass ? "1" : "0") << "," << r.note << "\n";
  }
  return os.str();
}

std::string PhaseReport::to_json() const {
  std::ostringstream os;
  os << "{\"phase\":\"" << phase << "\",\"pass\":" << (pass ? "true" : "false")
     << ",\"summary\":\"" << summary << "\",\"rows\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i) os << ",";
    os << "{\"parameters\":{";
    for (std::size_t p = 0; p < r.parameters.size(); ++p) {
      if (p) os << ",";
      os << "\"" << r.parameters[p].first << "\":\"" << r.parameters[p].second << "\"";
    }
    os << "},\"packet_rate_pps\":" << fmt_double(r.packet_rate_pps)
       << ",\"data_rate_bps\":" << fmt_double(r.data_rate_bps)
       << ",\"packets_received\":" << r.packets_received
       << ",\"bytes_received\":" << r.bytes_received << ",\"loss_events\":" << r.loss_events
       << ",\"packets_missing\":" << r.packets_missing
       << ",\"upper_limit_ratio\":" << fmt_double(r.upper_limit_ratio)
       << ",\"pass\":" << (r.pass ? "true" : "false") << ",\"note\":\"" << r.note << "\"}";
  }
  os << "],\"audits\":[";
  for (std::size_t i = 0; i < final_audits.size(); ++i) {
    if (i) os << ",";
    os << final_audits[i].to_json();
  }
  os << "]}";
  return os.str();
}

std::string PhaseReport::to_table() const {
  const auto cols = parameter_columns(rows);
  std::vector<std::string> headers = cols;
  headers.insert(headers.end(),
                 {"pkt/s", "bit/s", "packets", "loss_events", "upper_limit", "pass"});

  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (const auto& c : cols) line.push_back(r.parameter(c));
    line.push_back(fmt_double(r.packet_rate_pps));
    line.push_back(fmt_double(r.data_rate_bps));
    line.push_back(std::to_string(r.packets_received));
    line.push_back(std::to_string(r.loss_events));
    line.push_back(fmt_double(r.upper_limit_ratio));
    line.push_back(r.pass ? "ok" : "FAIL");
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& line : cells) widths[c] = std::max(widths[c], line[c].size());
  }

  std::ostringstream os;
  os << "phase: " << phase << "\n";
  const auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      os << line[c];
      for (std::size_t pad = line[c].size(); pad < widths[c] + 2; ++pad) os << ' ';
    }
    os << "\n";
  };
  emit(headers);
  for (const auto& line : cells) emit(line);
  if (!summary.empty()) os << summary << "\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dropkit

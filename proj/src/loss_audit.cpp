#include "dropkit/loss_audit.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace dropkit {

std::string to_string(const AuditEvent& e) {
  char buf[128];
  if (e.kind == AuditEventKind::Missing) {
    std::snprintf(buf, sizeof(buf), "missing(%" PRIu64 ")@id=%" PRIu64 ",idx=%" PRIu64,
                  e.count_or_distance, e.at_packet_id, e.at_receive_index);
  } else {
    std::snprintf(buf, sizeof(buf), "extra(d=%" PRId64 ")@id=%" PRIu64 ",idx=%" PRIu64,
                  e.distance(), e.at_packet_id, e.at_receive_index);
  }
  return buf;
}

bool AuditReport::accounting_identity_holds() const {
  if (!has_baseline) return packets_received == 0;
  const std::uint64_t span = last_packet_id - first_packet_id + 1;  // modular arithmetic
  return span == packets_received + total_missing - total_extra_excess;
}

std::string AuditReport::to_json() const {
  std::ostringstream os;
  os << "{\"stream_id\":" << stream_id << ",\"packets_received\":" << packets_received
     << ",\"packets_ok\":" << packets_ok << ",\"total_missing\":" << total_missing
     << ",\"extra_events\":" << extra_events << ",\"total_extra_excess\":" << total_extra_excess
     << ",\"first_packet_id\":" << first_packet_id << ",\"last_packet_id\":" << last_packet_id
     << ",\"events_dropped\":" << events_dropped;
  const auto limit = loss_upper_limit(packets_received, total_missing);
  if (limit) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", *limit);
    os << ",\"" << (total_missing > 0 ? "loss_ratio" : "loss_upper_limit") << "\":" << buf;
  } else {
    os << ",\"loss_ratio\":\"no data\"";
  }
  os << ",\"events\":[";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const AuditEvent& e = events[i];
    if (i) os << ",";
    os << "{\"kind\":\"" << (e.kind == AuditEventKind::Missing ? "missing" : "extra_or_repeat")
       << "\",\"distance\":" << e.distance() << ",\"at_packet_id\":" << e.at_packet_id
       << ",\"at_receive_index\":" << e.at_receive_index << ",\"timestamp_ns\":" << e.timestamp_ns
       << "}";
  }
  os << "]}";
  return os.str();
}

AuditState::AuditState(std::uint16_t stream_id, std::size_t max_events)
    : max_events_(max_events) {
  report_.stream_id = stream_id;
}

void AuditState::expect_first_id(std::uint64_t id) {
  // behave as if the packet before the expected one had been seen
  report_.has_baseline = true;
  report_.first_packet_id = id;
  prev_id_ = id - 1;
}

std::optional<AuditEvent> AuditState::observe(std::uint64_t packet_id,
                                              std::uint64_t timestamp_ns) {
  const std::uint64_t receive_index = report_.packets_received++;
  report_.last_packet_id = packet_id;
  if (!has_seen_any()) {
    report_.has_baseline = true;
    report_.first_packet_id = packet_id;
    report_.packets_ok++;
    prev_id_ = packet_id;
    return std::nullopt;
  }
  const std::int64_t d = id_distance(prev_id_, packet_id);
  prev_id_ = packet_id;
  if (d == 1) {
    report_.packets_ok++;
    return std::nullopt;
  }
  AuditEvent e;
  if (d > 1) {
    e.kind = AuditEventKind::Missing;
    e.count_or_distance = static_cast<std::uint64_t>(d - 1);
    report_.total_missing += e.count_or_distance;
  } else {
    e.kind = AuditEventKind::ExtraOrRepeat;
    e.count_or_distance = static_cast<std::uint64_t>(-d);
    report_.extra_events++;
    report_.total_extra_excess += static_cast<std::uint64_t>(1 - d);
  }
  e.at_packet_id = packet_id;
  e.at_receive_index = receive_index;
  e.timestamp_ns = timestamp_ns;
  if (report_.events.size() < max_events_)
    report_.events.push_back(e);
  else
    report_.events_dropped++;
  return e;
}

bool AuditState::has_seen_any() const { return report_.has_baseline; }

std::optional<double> loss_upper_limit(std::uint64_t packets_received, std::uint64_t missing) {
  if (packets_received == 0 && missing == 0) return std::nullopt;
  if (missing > 0)
    return static_cast<double>(missing) / (static_cast<double>(packets_received) + static_cast<double>(missing));
  return 1.0 / (static_cast<double>(packets_received) + 1.0);
}

std::vector<AuditEvent> reference_events(const std::vector<std::uint64_t>& delivered_ids) {
  std::vector<AuditEvent> out;
  if (delivered_ids.empty()) return out;
  std::uint64_t prev = delivered_ids[0];
  for (std::size_t i = 1; i < delivered_ids.size(); ++i) {
    const std::uint64_t id = delivered_ids[i];
    const std::int64_t d = id_distance(prev, id);
    prev = id;
    if (d == 1) continue;
    AuditEvent e;
    if (d > 1) {
      e.kind = AuditEventKind::Missing;
      e.count_or_distance = static_cast<std::uint64_t>(d - 1);
    } else {
      e.kind = AuditEventKind::ExtraOrRepeat;
      e.count_or_distance = static_cast<std::uint64_t>(-d);
    }
    e.at_packet_id = id;
    e.at_receive_index = i;
    out.push_back(e);
  }
  return out;
}

ReconcileDiff reconcile(const AuditReport& report,
                        const std::vector<std::uint64_t>& ground_truth_delivered_ids) {
  ReconcileDiff diff;
  const std::vector<AuditEvent> expected = reference_events(ground_truth_delivered_ids);
  if (report.packets_received != ground_truth_delivered_ids.size()) {
    std::ostringstream os;
    os << "packet count: audit saw " << report.packets_received << ", ground truth delivered "
       << ground_truth_delivered_ids.size();
    diff.mismatches.push_back(os.str());
  }
  if (report.events_dropped > 0)
    diff.mismatches.push_back("audit event list overflowed; comparison incomplete");
  const std::size_t n = std::max(expected.size(), report.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= expected.size()) {
      diff.mismatches.push_back("unexpected event: " + to_string(report.events[i]));
    } else if (i >= report.events.size()) {
      diff.mismatches.push_back("missing event: " + to_string(expected[i]));
    } else if (!(expected[i] == report.events[i])) {
      diff.mismatches.push_back("event mismatch: expected " + to_string(expected[i]) + ", got " +
                                to_string(report.events[i]));
    }
  }
  return diff;
}

std::string events_to_csv(const std::vector<AuditEvent>& events) {
  std::ostringstream os;
  os << "kind,distance,at_packet_id,at_receive_index,timestamp_ns\n";
  for (const AuditEvent& e : events) {
    os << (e.kind == AuditEventKind::Missing ? "missing" : "extra_or_repeat") << ","
       << e.distance() << "," << e.at_packet_id << "," << e.at_receive_index << ","
       << e.timestamp_ns << "\n";
  }
  return os.str();
}

}  // namespace dropkit

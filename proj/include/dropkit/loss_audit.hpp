#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dropkit/drop_header.hpp"

// Classification of packet-identifier jumps. Consecutive packets of a
// healthy stream have identifier distance exactly 1; a distance d > 1 means
// the d-1 packets in between were dropped, a distance d <= 0 means
// additional (repeated or delayed) packets are seen. More complex behavior,
// e.g. out-of-order delivery, shows up as combinations of the two cases.

namespace dropkit {

enum class AuditEventKind : std::uint8_t { Missing, ExtraOrRepeat };

struct AuditEvent {
  AuditEventKind kind;
  std::uint64_t count_or_distance;  // Missing: count >= 1. ExtraOrRepeat: -distance (>= 0).
  std::uint64_t at_packet_id;       // id of the packet that triggered the report
  std::uint64_t at_receive_index;   // 0-based position in the received sequence
  std::uint64_t timestamp_ns = 0;

  std::int64_t distance() const {
    return kind == AuditEventKind::Missing
               ? static_cast<std::int64_t>(count_or_distance) + 1
               : -static_cast<std::int64_t>(count_or_distance);
  }
  friend bool operator==(const AuditEvent& a, const AuditEvent& b) {
    return a.kind == b.kind && a.count_or_distance == b.count_or_distance &&
           a.at_packet_id == b.at_packet_id && a.at_receive_index == b.at_receive_index;
  }
};

std::string to_string(const AuditEvent& e);

struct AuditReport {
  std::uint16_t stream_id = 0;
  std::vector<AuditEvent> events;      // bounded; overflow counted below
  std::uint64_t events_dropped = 0;    // events beyond the in-memory bound
  std::uint64_t packets_received = 0;  // every observed packet
  std::uint64_t packets_ok = 0;        // baseline packet plus every d == 1 observation
  std::uint64_t total_missing = 0;     // sum of (d - 1) over d > 1 events
  std::uint64_t extra_events = 0;      // number of d <= 0 observations
  std::uint64_t total_extra_excess = 0;  // sum of (1 - d) over d <= 0 events
  std::uint64_t first_packet_id = 0;
  std::uint64_t last_packet_id = 0;
  bool has_baseline = false;

  // Holds for every completed run:
  //   last_id - first_id + 1 == packets_received + total_missing - total_extra_excess
  bool accounting_identity_holds() const;

  std::string to_json() const;
};

// Per-stream audit state, owned by the management thread.
class AuditState {
 public:
  // Default: the first observed packet sets the baseline and reports no
  // event (generators are started after the receiver, so there is no
  // misaligned starting point). With an expected first id, a stream that
  // starts elsewhere is reported as a jump.
  explicit AuditState(std::uint16_t stream_id = 0,
                      std::size_t max_events = kDefaultMaxEvents);
  void expect_first_id(std::uint64_t id);

  // Feed one received packet id. Returns the event it triggered, if any.
  std::optional<AuditEvent> observe(std::uint64_t packet_id, std::uint64_t timestamp_ns = 0);

  const AuditReport& report() const { return report_; }
  AuditReport snapshot() const { return report_; }

  static constexpr std::size_t kDefaultMaxEvents = 1'000'000;

 private:
  bool has_seen_any() const;

  AuditReport report_;
  std::uint64_t prev_id_ = 0;
  std::size_t max_events_;
};

// Upper limit on the ratio of lost to transferred packets. With zero
// observed losses it is assumed that the next packet got lost, giving
// 1 / (received + 1). Returns nothing when no packet was seen at all.
std::optional<double> loss_upper_limit(std::uint64_t packets_received, std::uint64_t missing);

// Reference simulator: the expected event sequence for packets delivered in
// the given order. Used to cross-check a live audit against the ground
// truth of a fault-injected run.
std::vector<AuditEvent> reference_events(const std::vector<std::uint64_t>& delivered_ids);

struct ReconcileDiff {
  std::vector<std::string> mismatches;
  bool empty() const { return mismatches.empty(); }
};

// Compares the events a live audit produced with the reference simulation
// of the ground-truth delivery order.
ReconcileDiff reconcile(const AuditReport& report,
                        const std::vector<std::uint64_t>& ground_truth_delivered_ids);

// Streams events as CSV rows (header + one row per event) for post-mortem
// analysis of reorder patterns.
std::string events_to_csv(const std::vector<AuditEvent>& events);

}  // namespace dropkit

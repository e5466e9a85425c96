#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dropkit/sender.hpp"
#include "dropkit/topology.hpp"
#include "dropkit/transport.hpp"

// Declarative experiment configuration: a JSON file describes the phase,
// the streams, the transport, placement and stop conditions; the command
// line can override the common knobs. The effective configuration is
// serialized next to the results so a run can be reproduced exactly.

namespace dropkit {

enum class Phase : std::uint8_t {
  MaxRate,
  LosslessRate,
  SizeSweep,
  AssignmentSearch,
  Soak,
  FaultOracle,
};

const char* to_string(Phase p);
bool phase_from_string(const std::string& s, Phase& out);

enum class TransportChoice : std::uint8_t { Loopback, Udp, Raw, SimCost };

const char* to_string(TransportChoice t);
bool transport_from_string(const std::string& s, TransportChoice& out);

struct SlotRingConfig {
  std::uint32_t slot_count = 4096;
  std::uint32_t slot_size = 2048;
  friend bool operator==(const SlotRingConfig&, const SlotRingConfig&) = default;
};

struct PhaseParams {
  // max-rate
  std::uint32_t max_streams = 4;
  double per_stream_rate_pps = 0;  // 0 = unpaced
  bool histogram = true;           // false: count and audit only, no payload decoding
  // lossless-rate / size-sweep
  double start_rate_pps = 1000;
  double rate_step_factor = 1.25;   // sweep: rate multiplied per step
  double stop_ratio = 0.85;         // sweep ends once measured/expected falls below
  std::uint64_t probe_packets = 20000;  // packets per measurement step and stream
  std::uint64_t cost_base_ns = 1000;
  std::uint64_t cost_per_segment_ns = 500;
  // assignment search
  bool rule_w = true;
  // soak
  bool abort_on_event = false;
  // fault oracle
  std::uint32_t oracle_runs = 100;
  std::uint64_t oracle_packets = 1000000;
  double max_fault_prob = 1e-3;
  bool oracle_self_test = false;

  friend bool operator==(const PhaseParams&, const PhaseParams&) = default;
};

struct ExperimentConfig {
  Phase phase = Phase::Soak;
  TransportChoice transport = TransportChoice::Loopback;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::uint64_t duration_s = 0;            // wall-clock stop (monotonic)
  std::uint64_t packets_per_stream = 0;    // exact packet-count stop
  SlotRingConfig slot_ring;
  std::vector<StreamConfig> streams;
  std::optional<AssignmentPlan> placement;
  CoreMap core_map;
  FaultPlan faults;
  PhaseParams params;
  std::uint64_t stats_interval_s = 1;
  std::optional<std::uint64_t> expected_first_id;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

}  // namespace dropkit

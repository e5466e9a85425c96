#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dropkit/drop_header.hpp"
#include "dropkit/frame.hpp"
#include "dropkit/pattern.hpp"
#include "dropkit/transport.hpp"

// Multiplexes one or more generators into a DROP stream: every packet of
// the stream carries packet_id = previous + 1 regardless of which generator
// produced the payload. Generators attached to the same stream are drained
// round-robin (weighted by GeneratorConfig::weight), each paced on its own
// schedule.

namespace dropkit {

struct StreamConfig {
  std::uint16_t stream_id = 0;
  std::string address = "127.0.0.1";
  std::uint16_t port = 9000;
  std::uint64_t initial_packet_id = 0;
  std::vector<GeneratorConfig> generators;

  friend bool operator==(const StreamConfig&, const StreamConfig&) = default;
};

struct StopCondition {
  std::uint64_t max_packets = 0;   // 0 = unbounded
  std::uint64_t max_blocks = 0;    // completed blocks across all generators
  std::uint64_t max_duration_ns = 0;
  const std::atomic<bool>* abort_flag = nullptr;
};

struct SendSummary {
  std::uint64_t packets = 0;
  std::uint64_t payload_bytes = 0;  // user bytes, header excluded
  std::uint64_t duration_ns = 0;
  double achieved_pps = 0;
  double achieved_bps = 0;  // payload bits per second
  std::uint64_t next_packet_id = 0;
  bool complete = true;  // false when the transport failed mid-run
};

struct RawFrameConfig {
  FrameSpec spec;
};

class StreamSender {
 public:
  // raw == nullptr sends bare datagrams (DROP header + payload); with a
  // RawFrameConfig every packet is wrapped in an Ethernet/IPv4/UDP frame.
  StreamSender(const StreamConfig& cfg, Transport& transport, const RawFrameConfig* raw = nullptr);

  // Drains the generators until the stop condition is met. Pacing uses
  // absolute deadlines, so a delayed packet is followed by a catch-up burst
  // and the long-run rate converges to the configured one.
  SendSummary run(const StopCondition& stop);

  // Virtual-time variant: no sleeping, packets carry their scheduled send
  // time instead. Used with the simulated transports.
  SendSummary run_virtual(const StopCondition& stop);

 private:
  SendSummary run_impl(const StopCondition& stop, bool real_time);

  StreamConfig cfg_;
  Transport& transport_;
  bool raw_ = false;
  FrameSpec frame_spec_;
};

}  // namespace dropkit

#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "dropkit/drop_header.hpp"
#include "dropkit/frame.hpp"

// Receive-side counters. All counters are monotone; they may be read from
// a monitoring thread at any time with relaxed consistency and are exact
// once the receiver has quiesced.

namespace dropkit {

struct StreamStats {
  std::atomic<std::uint64_t> packets{0};
  std::atomic<std::uint64_t> bytes{0};  // user payload bytes
  std::atomic<std::uint64_t> truncated_header{0};
  std::atomic<std::uint64_t> unsupported_version{0};
  std::atomic<std::uint64_t> flags_nonzero{0};
  std::atomic<std::uint64_t> payload_length_mismatch{0};
  std::atomic<std::uint64_t> misrouted{0};  // DROP stream id does not match the port binding

  void count_decode_error(HeaderDecodeError e) {
    switch (e) {
      case HeaderDecodeError::TruncatedHeader: truncated_header.fetch_add(1, std::memory_order_relaxed); break;
      case HeaderDecodeError::UnsupportedVersion: unsupported_version.fetch_add(1, std::memory_order_relaxed); break;
      case HeaderDecodeError::FlagsNonzero: flags_nonzero.fetch_add(1, std::memory_order_relaxed); break;
      case HeaderDecodeError::PayloadLengthMismatch: payload_length_mismatch.fetch_add(1, std::memory_order_relaxed); break;
      case HeaderDecodeError::None: break;
    }
  }
};

struct QueueStats {
  std::atomic<std::uint64_t> slots_exhausted{0};
  std::atomic<std::uint64_t> unbound_port{0};
  std::atomic<std::uint64_t> frame_errors{0};  // total across kinds
  std::atomic<std::uint64_t> ip_checksum{0};
  std::atomic<std::uint64_t> udp_checksum{0};
  std::atomic<std::uint64_t> udp_length{0};
  std::atomic<std::uint64_t> other_frame_error{0};

  void count_frame_error(FrameError e) {
    frame_errors.fetch_add(1, std::memory_order_relaxed);
    switch (e) {
      case FrameError::IpChecksum: ip_checksum.fetch_add(1, std::memory_order_relaxed); break;
      case FrameError::UdpChecksum: udp_checksum.fetch_add(1, std::memory_order_relaxed); break;
      case FrameError::UdpLength: udp_length.fetch_add(1, std::memory_order_relaxed); break;
      default: other_frame_error.fetch_add(1, std::memory_order_relaxed); break;
    }
  }
};

// Plain-value snapshot of the atomics above.
struct RxStatsSnapshot {
  struct Stream {
    std::uint16_t stream_id = 0;
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    std::uint64_t truncated_header = 0;
    std::uint64_t unsupported_version = 0;
    std::uint64_t flags_nonzero = 0;
    std::uint64_t payload_length_mismatch = 0;
    std::uint64_t misrouted = 0;
  };
  struct Queue {
    std::uint32_t queue_index = 0;
    std::uint64_t slots_exhausted = 0;
    std::uint64_t unbound_port = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t ip_checksum = 0;
    std::uint64_t udp_checksum = 0;
    std::uint64_t udp_length = 0;
    std::uint64_t other_frame_error = 0;
  };
  std::vector<Stream> streams;
  std::vector<Queue> queues;
  std::uint64_t timestamp_ns = 0;

  std::string to_json() const;
};

}  // namespace dropkit

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dropkit/drop_header.hpp"
#include "dropkit/frame.hpp"
#include "dropkit/slot_ring.hpp"

// Pluggable packet transports. Loopback delivers into a receiver's slot
// ring in-process and is the correctness/CI path; UDP sockets are the
// portable path; raw frames carry full Ethernet/IPv4/UDP encapsulation.
// Decorators add seeded fault injection and deterministic capacity/cost
// models on top of a loopback.

namespace dropkit {

enum class TransportMode : std::uint8_t { Loopback, UdpSocket, RawFrame };

// A transport is used by one sending thread at a time. `scheduled_ns` is
// the packet's position on the sender's pacing timeline; real transports
// ignore it, simulated ones use it as the virtual arrival time.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) = 0;
  virtual void close() = 0;
};

// One receive queue: the per-stream endpoint a loopback sender delivers
// into. Mirrors NIC queue steering -- packets for one UDP destination port
// land in one queue. Slots travel free -> intake -> (receiver) and are
// recycled through `free_ring` by the worker that finishes with them.
struct LoopbackEndpoint {
  LoopbackEndpoint(std::uint32_t slot_count, std::uint32_t slot_size, std::uint16_t dst_port_,
                   bool raw_frames_, bool block_on_full_)
      : pool(slot_count, slot_size),
        free_ring(slot_count),
        intake_ring(slot_count),
        dst_port(dst_port_),
        raw_frames(raw_frames_),
        block_on_full(block_on_full_) {
    for (std::uint32_t i = 0; i < slot_count; ++i) free_ring.try_push(i);
  }

  SlotPool pool;
  SpscRing free_ring;    // producer: worker, consumer: sending side
  SpscRing intake_ring;  // producer: sending side, consumer: management thread
  std::uint16_t dst_port;
  bool raw_frames;
  // Blocking keeps an unfaulted loopback lossless; non-blocking drops the
  // newest packet and counts it, like a NIC with no free slot.
  bool block_on_full;
  std::uint32_t queue_index = 0;
  std::atomic<std::uint64_t> slots_exhausted{0};
  std::atomic<bool> closed{false};
  std::atomic<std::uint64_t> last_timestamp_ns{0};
};

class LoopbackTransport : public Transport {
 public:
  explicit LoopbackTransport(std::shared_ptr<LoopbackEndpoint> ep) : ep_(std::move(ep)) {}
  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override;
  void close() override { ep_->closed.store(true, std::memory_order_release); }
  LoopbackEndpoint& endpoint() { return *ep_; }

 private:
  std::shared_ptr<LoopbackEndpoint> ep_;
};

// ---------------------------------------------------------------------------
// Fault injection (loopback only). Every decision comes from one seeded
// generator in send order, so an independent replay with the same plan
// reproduces the decisions exactly. The injector records the ground truth:
// which packets were dropped or duplicated and the final delivery order.

struct FaultPlan {
  double drop_prob = 0;
  double dup_prob = 0;
  double reorder_prob = 0;
  std::uint32_t reorder_depth = 1;  // max positions a reordered packet is delayed
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> drop_at;  // exact send indices to drop (targeted injection)

  bool is_noop() const {
    return drop_prob == 0 && dup_prob == 0 && reorder_prob == 0 && drop_at.empty();
  }
  friend bool operator==(const FaultPlan&, const FaultPlan&) = default;
};

struct FaultGroundTruth {
  std::vector<std::uint64_t> delivered_ids;  // packet ids in delivery order
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t reordered = 0;
};

class FaultInjectingTransport : public Transport {
 public:
  // `header_offset`: where the DROP header sits in the bytes handed to
  // send() (0 for datagrams, 42 for raw frames).
  FaultInjectingTransport(std::unique_ptr<Transport> inner, const FaultPlan& plan,
                          std::size_t header_offset = 0);
  ~FaultInjectingTransport() override;

  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override;
  void close() override;

  const FaultGroundTruth& ground_truth() const { return truth_; }

 private:
  struct Held {
    std::vector<std::uint8_t> bytes;
    std::uint64_t scheduled_ns;
    std::uint32_t remaining;
  };
  bool deliver(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns);
  void release_due();
  void flush();
  double next_uniform();

  std::unique_ptr<Transport> inner_;
  FaultPlan plan_;
  std::size_t header_offset_;
  std::uint64_t rng_state_;
  std::uint64_t send_index_ = 0;
  std::size_t next_drop_at_ = 0;
  std::vector<Held> held_;
  FaultGroundTruth truth_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Deterministic server model: a packet arriving while the server is still
// busy with the previous one is dropped. Cost is charged per packet as
// base + ceil(user_payload / segment) * per_segment, all in virtual
// nanoseconds taken from the sender's pacing timeline. A pure packet-rate
// capacity C is the special case {base = 1e9/C, per_segment = 0}.
// Thread-safe; streams sharing the model contend for the same capacity.

struct ServerCostModel {
  std::uint64_t base_ns = 0;
  std::uint64_t per_segment_ns = 0;
  std::uint32_t segment_bytes = 64;
  std::size_t header_overhead = kDropHeaderSize;  // subtracted before segment counting

  std::uint64_t cost_ns(std::size_t wire_len) const {
    const std::size_t user = wire_len > header_overhead ? wire_len - header_overhead : 0;
    const std::uint64_t segments = (user + segment_bytes - 1) / segment_bytes;
    return base_ns + segments * per_segment_ns;
  }
  static ServerCostModel packet_rate_capacity(double packets_per_second) {
    return {static_cast<std::uint64_t>(1e9 / packets_per_second), 0, 64, kDropHeaderSize};
  }
};

class CostModelState {
 public:
  explicit CostModelState(const ServerCostModel& model) : model_(model) {}
  // Returns true when the packet is accepted (server idle at arrival).
  bool admit(std::size_t len, std::uint64_t arrival_ns);
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t rejected() const { return rejected_; }

 private:
  ServerCostModel model_;
  std::mutex mu_;
  std::uint64_t busy_until_ns_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
};

class CostModelTransport : public Transport {
 public:
  CostModelTransport(std::unique_ptr<Transport> inner, std::shared_ptr<CostModelState> state)
      : inner_(std::move(inner)), state_(std::move(state)) {}
  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override {
    if (!state_->admit(len, scheduled_ns)) return true;  // dropped by the model, not an error
    return inner_->send(data, len, scheduled_ns);
  }
  void close() override { inner_->close(); }

 private:
  std::unique_ptr<Transport> inner_;
  std::shared_ptr<CostModelState> state_;
};

// ---------------------------------------------------------------------------
// UDP socket transport (one socket per stream, connected to the
// destination).

class UdpSocketTransport : public Transport {
 public:
  UdpSocketTransport(const std::string& address, std::uint16_t port);
  ~UdpSocketTransport() override;
  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override;
  void close() override;

 private:
  int fd_ = -1;
};

// Raw AF_PACKET transport (Linux, needs CAP_NET_RAW). The frame bytes are
// produced by the sender's raw-frame encapsulation; this just puts them on
// the wire. Throws std::runtime_error when the socket cannot be opened.
class RawPacketTransport : public Transport {
 public:
  explicit RawPacketTransport(const std::string& interface_name);
  ~RawPacketTransport() override;
  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override;
  void close() override;

 private:
  int fd_ = -1;
  int ifindex_ = 0;
};

std::uint64_t monotonic_ns();

}  // namespace dropkit

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dropkit/histogram.hpp"
#include "dropkit/loss_audit.hpp"
#include "dropkit/slot_ring.hpp"
#include "dropkit/stats.hpp"
#include "dropkit/topology.hpp"
#include "dropkit/transport.hpp"

// The receive pipeline. One management thread services all receive queues
// of the instance: it takes filled slots, parses frames (raw mode), checks
// the packet identifier, and counts packets and bytes. One worker thread
// per stream histograms the payload words, reading the slot in place - the
// same split the real system uses so that only payload work leaves the
// management thread. Slot ownership transfers through SPSC rings are the
// only cross-thread communication.

namespace dropkit {

struct StreamBinding {
  std::uint16_t port = 9000;
  std::uint16_t stream_id = 0;

  friend bool operator==(const StreamBinding&, const StreamBinding&) = default;
};

struct ReceiverConfig {
  std::uint32_t slot_count = 4096;  // per receive queue; power of two
  std::uint32_t slot_size = 2048;
  bool raw_frames = false;     // queues carry full Ethernet/IPv4/UDP frames
  bool block_on_full = true;   // loopback backpressure instead of drop-newest
  bool histogram_enabled = true;
  bool abort_on_event = false;  // stop the run on the first audit event
  std::optional<std::uint64_t> expected_first_id;
  std::size_t max_audit_events = AuditState::kDefaultMaxEvents;
  // optional placement
  std::optional<AssignmentPlan> placement;
  CoreMap core_map;
  std::uint32_t ccx = 0;
  std::string udp_bind_address = "127.0.0.1";
};

class Receiver {
 public:
  Receiver(std::vector<StreamBinding> bindings, ReceiverConfig cfg);
  ~Receiver();

  Receiver(const Receiver&) = delete;
  Receiver& operator=(const Receiver&) = delete;

  // Loopback wiring: the endpoint for stream index i, to hand to a
  // LoopbackTransport. Must be taken before start().
  std::shared_ptr<LoopbackEndpoint> loopback_endpoint(std::size_t stream_index);

  // UDP wiring: bind one socket per stream port. Call instead of taking
  // loopback endpoints.
  void open_udp_sockets();

  void start();

  // Orderly shutdown: waits until every queue is drained (loopback
  // endpoints closed and empty; UDP sockets idle), lets the workers finish
  // the slots in flight, and joins all threads.
  void stop_and_drain();

  // Set by the management thread when abort_on_event fires; senders poll it
  // through their StopCondition.
  std::atomic<bool>& abort_flag() { return abort_; }

  RxStatsSnapshot stats_snapshot() const;
  const AuditReport& audit_report(std::size_t stream_index) const;
  const WordHistogram& histogram(std::size_t stream_index) const;
  WordHistogram merged_histogram() const;

  // True when every slot is back in its free pool (valid after
  // stop_and_drain).
  bool slot_ownership_clean() const;

  std::size_t stream_count() const { return bindings_.size(); }
  const StreamBinding& binding(std::size_t i) const { return bindings_[i]; }

 private:
  struct StreamCtx;
  void management_loop();
  void worker_loop(std::size_t stream_index);
  void process_slot(std::uint32_t queue, std::uint32_t slot);
  void recycle(std::uint32_t queue, std::uint32_t slot);
  bool poll_udp(std::uint32_t queue);

  std::vector<StreamBinding> bindings_;
  ReceiverConfig cfg_;
  std::vector<std::shared_ptr<LoopbackEndpoint>> endpoints_;
  std::vector<int> udp_fds_;
  std::vector<std::unique_ptr<StreamCtx>> streams_;
  std::vector<std::unique_ptr<QueueStats>> queue_stats_;

  std::thread mgmt_thread_;
  std::vector<std::thread> worker_threads_;
  std::atomic<bool> draining_{false};
  std::atomic<bool> abort_{false};
  bool started_ = false;
  bool stopped_ = false;
  std::uint64_t udp_idle_grace_ns_ = 50'000'000;
};

}  // namespace dropkit

#include "dropkit/receiver.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

#include "dropkit/drop_header.hpp"
#include "dropkit/frame.hpp"

#ifdef __linux__
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#endif

namespace dropkit {

namespace {
// Work/return ring entries carry (queue, slot) packed into 32 bits so a
// worker can hand a slot back to the pool it came from.
constexpr std::uint32_t kQueueShift = 24;
constexpr std::uint32_t kSlotMask = (1u << kQueueShift) - 1;
constexpr std::uint32_t kStopSentinel = 0xffffffffu;

inline std::uint32_t pack(std::uint32_t queue, std::uint32_t slot) {
  return (queue << kQueueShift) | slot;
}
}  // namespace

struct Receiver::StreamCtx {
  StreamCtx(std::uint16_t stream_id, std::uint32_t ring_capacity, std::size_t max_events)
      : audit(stream_id, max_events), work_ring(ring_capacity), return_ring(ring_capacity) {}
  AuditState audit;
  StreamStats stats;
  WordHistogram hist;
  SpscRing work_ring;    // producer: management thread, consumer: worker
  SpscRing return_ring;  // producer: worker, consumer: management thread
  std::uint64_t in_flight = 0;  // touched by the management thread only
};

Receiver::Receiver(std::vector<StreamBinding> bindings, ReceiverConfig cfg)
    : bindings_(std::move(bindings)), cfg_(cfg) {
  if (bindings_.empty()) throw std::invalid_argument("receiver: no stream bindings");
  if (bindings_.size() >= 255) throw std::invalid_argument("receiver: too many streams");
  if (cfg_.slot_size > kMaxSlotSize)
    throw std::invalid_argument("receiver: slot_size exceeds the supported maximum of 2048");
  if (cfg_.slot_count == 0 || (cfg_.slot_count & (cfg_.slot_count - 1)) != 0)
    throw std::invalid_argument("receiver: slot_count must be a power of two");
  if (cfg_.slot_count > kSlotMask)
    throw std::invalid_argument("receiver: slot_count too large");
  for (std::size_t i = 0; i < bindings_.size(); ++i)
    for (std::size_t j = i + 1; j < bindings_.size(); ++j)
      if (bindings_[i].port == bindings_[j].port)
        throw std::invalid_argument("receiver: duplicate port binding");
  if (cfg_.placement && cfg_.placement->worker_positions.size() != bindings_.size())
    throw std::invalid_argument("receiver: placement has wrong worker count");

  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    streams_.push_back(std::make_unique<StreamCtx>(bindings_[i].stream_id, cfg_.slot_count,
                                                   cfg_.max_audit_events));
    if (cfg_.expected_first_id) streams_[i]->audit.expect_first_id(*cfg_.expected_first_id);
    queue_stats_.push_back(std::make_unique<QueueStats>());
  }
}

Receiver::~Receiver() {
  if (started_ && !stopped_) stop_and_drain();
#ifdef __linux__
  for (int fd : udp_fds_)
    if (fd >= 0) ::close(fd);
#endif
}

std::shared_ptr<LoopbackEndpoint> Receiver::loopback_endpoint(std::size_t stream_index) {
  if (started_) throw std::logic_error("endpoints must be taken before start()");
  if (!udp_fds_.empty()) throw std::logic_error("receiver already opened UDP sockets");
  endpoints_.resize(bindings_.size());
  auto& ep = endpoints_.at(stream_index);
  if (!ep) {
    ep = std::make_shared<LoopbackEndpoint>(cfg_.slot_count, cfg_.slot_size,
                                            bindings_[stream_index].port, cfg_.raw_frames,
                                            cfg_.block_on_full);
    ep->queue_index = static_cast<std::uint32_t>(stream_index);
  }
  return ep;
}

void Receiver::open_udp_sockets() {
#ifdef __linux__
  if (!endpoints_.empty()) throw std::logic_error("receiver already has loopback endpoints");
  udp_fds_.resize(bindings_.size(), -1);
  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw std::runtime_error("udp socket: " + std::string(std::strerror(errno)));
    const int rcvbuf = 8 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(bindings_[i].port);
    if (::inet_pton(AF_INET, cfg_.udp_bind_address.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw std::runtime_error("udp bind: bad address " + cfg_.udp_bind_address);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(fd);
      throw std::runtime_error("udp bind port " + std::to_string(bindings_[i].port) + ": " +
                               std::string(std::strerror(errno)));
    }
    udp_fds_[i] = fd;
    // a socket acts as a receive queue; slots are drawn from a per-queue pool
    endpoints_.push_back(std::make_shared<LoopbackEndpoint>(cfg_.slot_count, cfg_.slot_size,
                                                            bindings_[i].port, false, false));
    endpoints_.back()->queue_index = static_cast<std::uint32_t>(i);
  }
#else
  throw std::runtime_error("udp receive unavailable on this platform");
#endif
}

void Receiver::start() {
  if (started_) throw std::logic_error("receiver already started");
  if (endpoints_.empty()) {
    // default to loopback wiring even if the caller took no endpoint yet
    for (std::size_t i = 0; i < bindings_.size(); ++i) loopback_endpoint(i);
  }
  for (std::size_t i = 0; i < endpoints_.size(); ++i)
    if (!endpoints_[i]) loopback_endpoint(i);

  if (cfg_.placement && !cfg_.core_map.empty()) {
    // surface core-map configuration errors here, not inside the threads
    const auto it = cfg_.core_map.find(cfg_.ccx);
    if (it == cfg_.core_map.end())
      throw std::invalid_argument("core map has no entry for ccx " + std::to_string(cfg_.ccx));
    auto check = [&](std::uint32_t pos) {
      if (pos >= it->second.size())
        throw std::invalid_argument("core map too small for position " + std::to_string(pos));
    };
    check(cfg_.placement->receiver_position);
    for (std::uint32_t w : cfg_.placement->worker_positions) check(w);
  }

  started_ = true;
  mgmt_thread_ = std::thread([this] { management_loop(); });
  for (std::size_t i = 0; i < streams_.size(); ++i)
    worker_threads_.emplace_back([this, i] { worker_loop(i); });
}

void Receiver::stop_and_drain() {
  if (!started_ || stopped_) return;
  draining_.store(true, std::memory_order_release);
  mgmt_thread_.join();
  for (auto& t : worker_threads_) t.join();
  worker_threads_.clear();
  stopped_ = true;
}

void Receiver::recycle(std::uint32_t queue, std::uint32_t slot) {
  endpoints_[queue]->free_ring.push(slot);
}

void Receiver::process_slot(std::uint32_t queue, std::uint32_t slot) {
  LoopbackEndpoint& ep = *endpoints_[queue];
  const std::uint8_t* data = ep.pool.data(slot);
  SlotMeta& meta = ep.pool.meta(slot);
  QueueStats& qs = *queue_stats_[queue];

  const std::uint8_t* payload = data;
  std::size_t payload_len = meta.frame_len;
  std::uint16_t dst_port = ep.dst_port;
  std::uint32_t payload_base = 0;

  if (cfg_.raw_frames) {
    const ParsedFrame pf = parse_frame(data, meta.frame_len);
    if (!pf.ok()) {
      qs.count_frame_error(pf.error);
      recycle(queue, slot);
      return;
    }
    payload = data + pf.payload_offset;
    payload_len = pf.payload_len;
    payload_base = pf.payload_offset;
    dst_port = pf.dst_port;
  }

  // demultiplex on the UDP destination port
  std::size_t sidx = bindings_.size();
  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    if (bindings_[i].port == dst_port) {
      sidx = i;
      break;
    }
  }
  if (sidx == bindings_.size()) {
    qs.unbound_port.fetch_add(1, std::memory_order_relaxed);
    recycle(queue, slot);
    return;
  }
  StreamCtx& sc = *streams_[sidx];

  const HeaderDecodeResult dec = decode_header(payload, payload_len);
  if (!dec.ok()) {
    sc.stats.count_decode_error(dec.error);
    recycle(queue, slot);
    return;
  }
  if (dec.header.stream_id != bindings_[sidx].stream_id) {
    sc.stats.misrouted.fetch_add(1, std::memory_order_relaxed);
    recycle(queue, slot);
    return;
  }

  const auto event = sc.audit.observe(dec.header.packet_id, meta.timestamp_ns);
  if (event && cfg_.abort_on_event) abort_.store(true, std::memory_order_release);
  sc.stats.packets.fetch_add(1, std::memory_order_relaxed);
  sc.stats.bytes.fetch_add(dec.header.payload_len, std::memory_order_relaxed);

  if (!cfg_.histogram_enabled) {
    recycle(queue, slot);
    return;
  }
  meta.payload_offset = payload_base + kDropHeaderSize;
  meta.payload_len = dec.header.payload_len;
  meta.packet_id = dec.header.packet_id;
  sc.work_ring.push(pack(queue, slot));
  ++sc.in_flight;
}

bool Receiver::poll_udp(std::uint32_t queue) {
#ifdef __linux__
  LoopbackEndpoint& ep = *endpoints_[queue];
  std::uint32_t slot;
  bool have_slot = ep.free_ring.try_pop(slot);
  std::uint8_t scratch[kMaxSlotSize];
  std::uint8_t* dst = have_slot ? ep.pool.data(slot) : scratch;

  const ssize_t n = ::recv(udp_fds_[queue], dst, cfg_.slot_size, MSG_DONTWAIT);
  if (n < 0) {
    if (have_slot) ep.free_ring.push(slot);
    return false;
  }
  if (!have_slot) {
    // no free slot: the newest packet is dropped and the event counted
    ep.slots_exhausted.fetch_add(1, std::memory_order_relaxed);
    return true;
  }
  SlotMeta& m = ep.pool.meta(slot);
  m.frame_len = static_cast<std::uint32_t>(n);
  m.queue_index = queue;
  m.timestamp_ns = monotonic_ns();
  process_slot(queue, slot);
  return true;
#else
  (void)queue;
  return false;
#endif
}

void Receiver::management_loop() {
  if (cfg_.placement && !cfg_.core_map.empty()) {
    pin_current_thread(cfg_.placement->receiver_position, cfg_.ccx, cfg_.core_map);
  }
  const bool udp = !udp_fds_.empty();
  constexpr int kBatch = 256;
  int idle_spins = 0;
  std::uint64_t udp_idle_since = 0;

  for (;;) {
    bool any = false;

    for (std::uint32_t q = 0; q < endpoints_.size(); ++q) {
      if (udp) {
        for (int b = 0; b < kBatch && poll_udp(q); ++b) any = true;
      } else {
        std::uint32_t slot;
        for (int b = 0; b < kBatch && endpoints_[q]->intake_ring.try_pop(slot); ++b) {
          process_slot(q, slot);
          any = true;
        }
      }
    }
    // recycle what the workers are done with
    for (auto& sc : streams_) {
      std::uint32_t entry;
      while (sc->return_ring.try_pop(entry)) {
        recycle(entry >> kQueueShift, entry & kSlotMask);
        --sc->in_flight;
        any = true;
      }
    }

    if (any) {
      idle_spins = 0;
      udp_idle_since = 0;
      continue;
    }

    if (draining_.load(std::memory_order_acquire)) {
      bool drained = true;
      if (udp) {
        // sockets are quiet; allow a grace period for packets in the kernel
        const std::uint64_t now = monotonic_ns();
        if (udp_idle_since == 0) udp_idle_since = now;
        if (now - udp_idle_since < udp_idle_grace_ns_) drained = false;
      } else {
        for (auto& ep : endpoints_) {
          if (!ep->closed.load(std::memory_order_acquire) || !ep->intake_ring.empty()) {
            drained = false;
            break;
          }
        }
      }
      if (drained) break;
    }
    SpscRing::backoff(idle_spins++);
  }

  // all intake is processed; stop the workers and collect the leftovers
  for (auto& sc : streams_) sc->work_ring.push(kStopSentinel);
  bool outstanding = true;
  int spin = 0;
  while (outstanding) {
    outstanding = false;
    for (auto& sc : streams_) {
      std::uint32_t entry;
      while (sc->return_ring.try_pop(entry)) {
        recycle(entry >> kQueueShift, entry & kSlotMask);
        --sc->in_flight;
      }
      if (sc->in_flight > 0) outstanding = true;
    }
    if (outstanding) SpscRing::backoff(spin++);
  }
}

void Receiver::worker_loop(std::size_t stream_index) {
  if (cfg_.placement && !cfg_.core_map.empty()) {
    pin_current_thread(cfg_.placement->worker_positions[stream_index], cfg_.ccx, cfg_.core_map);
  }
  StreamCtx& sc = *streams_[stream_index];
  for (;;) {
    std::uint32_t entry;
    int spin = 0;
    while (!sc.work_ring.try_pop(entry)) SpscRing::backoff(spin++);
    if (entry == kStopSentinel) break;
    const std::uint32_t queue = entry >> kQueueShift;
    const std::uint32_t slot = entry & kSlotMask;
    const SlotMeta& meta = endpoints_[queue]->pool.meta(slot);
    sc.hist.accumulate(endpoints_[queue]->pool.data(slot) + meta.payload_offset,
                       meta.payload_len);
    sc.return_ring.push(entry);
  }
}

RxStatsSnapshot Receiver::stats_snapshot() const {
  RxStatsSnapshot snap;
  snap.timestamp_ns = monotonic_ns();
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    const StreamStats& st = streams_[i]->stats;
    RxStatsSnapshot::Stream s;
    s.stream_id = bindings_[i].stream_id;
    s.packets = st.packets.load(std::memory_order_relaxed);
    s.bytes = st.bytes.load(std::memory_order_relaxed);
    s.truncated_header = st.truncated_header.load(std::memory_order_relaxed);
    s.unsupported_version = st.unsupported_version.load(std::memory_order_relaxed);
    s.flags_nonzero = st.flags_nonzero.load(std::memory_order_relaxed);
    s.payload_length_mismatch = st.payload_length_mismatch.load(std::memory_order_relaxed);
    s.misrouted = st.misrouted.load(std::memory_order_relaxed);
    snap.streams.push_back(s);
  }
  for (std::size_t q = 0; q < queue_stats_.size(); ++q) {
    const QueueStats& qs = *queue_stats_[q];
    RxStatsSnapshot::Queue out;
    out.queue_index = static_cast<std::uint32_t>(q);
    out.slots_exhausted =
        q < endpoints_.size() && endpoints_[q]
            ? endpoints_[q]->slots_exhausted.load(std::memory_order_relaxed)
            : 0;
    out.unbound_port = qs.unbound_port.load(std::memory_order_relaxed);
    out.frame_errors = qs.frame_errors.load(std::memory_order_relaxed);
    out.ip_checksum = qs.ip_checksum.load(std::memory_order_relaxed);
    out.udp_checksum = qs.udp_checksum.load(std::memory_order_relaxed);
    out.udp_length = qs.udp_length.load(std::memory_order_relaxed);
    out.other_frame_error = qs.other_frame_error.load(std::memory_order_relaxed);
    snap.queues.push_back(out);
  }
  return snap;
}

const AuditReport& Receiver::audit_report(std::size_t stream_index) const {
  return streams_.at(stream_index)->audit.report();
}

const WordHistogram& Receiver::histogram(std::size_t stream_index) const {
  return streams_.at(stream_index)->hist;
}

WordHistogram Receiver::merged_histogram() const {
  WordHistogram merged;
  for (const auto& sc : streams_) merged.merge(sc->hist);
  return merged;
}

bool Receiver::slot_ownership_clean() const {
  for (const auto& ep : endpoints_) {
    if (!ep) continue;
    if (ep->free_ring.size() != ep->pool.slot_count()) return false;
  }
  return true;
}

}  // namespace dropkit

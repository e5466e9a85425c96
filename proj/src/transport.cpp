#include "dropkit/transport.hpp"

#include <chrono>
#include <cstring>
#include <stdexcept>

#ifdef __linux__
#include <arpa/inet.h>
#include <linux/if_ether.h>
#include <net/if.h>
#include <netinet/in.h>
#include <netpacket/packet.h>
#include <sys/socket.h>
#include <unistd.h>
#endif

namespace dropkit {

std::uint64_t monotonic_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

bool LoopbackTransport::send(const std::uint8_t* data, std::size_t len,
                             std::uint64_t /*scheduled_ns*/) {
  LoopbackEndpoint& ep = *ep_;
  if (len > ep.pool.slot_size()) return false;
  std::uint32_t slot = 0;
  if (ep.block_on_full) {
    for (int spin = 0; !ep.free_ring.try_pop(slot); ++spin) SpscRing::backoff(spin);
  } else if (!ep.free_ring.try_pop(slot)) {
    ep.slots_exhausted.fetch_add(1, std::memory_order_relaxed);
    return true;  // drop-newest, counted; not a transport failure
  }
  std::memcpy(ep.pool.data(slot), data, len);
  SlotMeta& m = ep.pool.meta(slot);
  m.frame_len = static_cast<std::uint32_t>(len);
  m.queue_index = ep.queue_index;
  // receive timestamps are monotone non-decreasing per queue
  std::uint64_t now = monotonic_ns();
  const std::uint64_t prev = ep.last_timestamp_ns.load(std::memory_order_relaxed);
  if (now < prev) now = prev;
  ep.last_timestamp_ns.store(now, std::memory_order_relaxed);
  m.timestamp_ns = now;
  ep.intake_ring.push(slot);
  return true;
}

// ---------------------------------------------------------------------------

namespace {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

FaultInjectingTransport::FaultInjectingTransport(std::unique_ptr<Transport> inner,
                                                 const FaultPlan& plan,
                                                 std::size_t header_offset)
    : inner_(std::move(inner)), plan_(plan), header_offset_(header_offset),
      rng_state_(plan.seed) {}

FaultInjectingTransport::~FaultInjectingTransport() {
  if (!closed_) flush();
}

double FaultInjectingTransport::next_uniform() {
  return static_cast<double>(splitmix64(rng_state_) >> 11) * 0x1.0p-53;
}

bool FaultInjectingTransport::deliver(const std::uint8_t* data, std::size_t len,
                                      std::uint64_t scheduled_ns) {
  if (len >= header_offset_ + kDropHeaderSize) {
    const auto dec = decode_header(data + header_offset_, len - header_offset_);
    if (dec.ok()) truth_.delivered_ids.push_back(dec.header.packet_id);
  }
  return inner_->send(data, len, scheduled_ns);
}

void FaultInjectingTransport::release_due() {
  for (auto it = held_.begin(); it != held_.end();) {
    if (it->remaining == 0) {
      deliver(it->bytes.data(), it->bytes.size(), it->scheduled_ns);
      it = held_.erase(it);
    } else {
      --it->remaining;
      ++it;
    }
  }
}

bool FaultInjectingTransport::send(const std::uint8_t* data, std::size_t len,
                                   std::uint64_t scheduled_ns) {
  const std::uint64_t idx = send_index_++;
  truth_.sent++;

  bool targeted_drop = false;
  if (next_drop_at_ < plan_.drop_at.size() && plan_.drop_at[next_drop_at_] == idx) {
    targeted_drop = true;
    ++next_drop_at_;
  }
  // fixed number of draws per packet keeps replays aligned
  const double u_drop = next_uniform();
  const double u_dup = next_uniform();
  const double u_reorder = next_uniform();

  bool ok = true;
  if (targeted_drop || u_drop < plan_.drop_prob) {
    truth_.dropped++;
  } else if (u_dup < plan_.dup_prob) {
    truth_.duplicated++;
    ok = deliver(data, len, scheduled_ns) && deliver(data, len, scheduled_ns);
  } else if (u_reorder < plan_.reorder_prob) {
    truth_.reordered++;
    const std::uint32_t depth =
        1 + static_cast<std::uint32_t>(splitmix64(rng_state_) %
                                       (plan_.reorder_depth == 0 ? 1 : plan_.reorder_depth));
    held_.push_back(Held{std::vector<std::uint8_t>(data, data + len), scheduled_ns, depth});
  } else {
    ok = deliver(data, len, scheduled_ns);
  }
  release_due();
  return ok;
}

void FaultInjectingTransport::flush() {
  for (auto& h : held_) deliver(h.bytes.data(), h.bytes.size(), h.scheduled_ns);
  held_.clear();
}

void FaultInjectingTransport::close() {
  if (closed_) return;
  flush();
  closed_ = true;
  inner_->close();
}

// ---------------------------------------------------------------------------

bool CostModelState::admit(std::size_t len, std::uint64_t arrival_ns) {
  std::lock_guard<std::mutex> lock(mu_);
  if (arrival_ns < busy_until_ns_) {
    ++rejected_;
    return false;
  }
  busy_until_ns_ = arrival_ns + model_.cost_ns(len);
  ++accepted_;
  return true;
}

// ---------------------------------------------------------------------------

#ifdef __linux__

UdpSocketTransport::UdpSocketTransport(const std::string& address, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("udp socket: " + std::string(std::strerror(errno)));
  sockaddr_in dst{};
  dst.sin_family = AF_INET;
  dst.sin_port = htons(port);
  if (::inet_pton(AF_INET, address.c_str(), &dst.sin_addr) != 1) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("udp transport: bad address " + address);
  }
  const int sndbuf = 4 << 20;
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &sndbuf, sizeof(sndbuf));
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&dst), sizeof(dst)) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("udp connect: " + std::string(std::strerror(errno)));
  }
}

UdpSocketTransport::~UdpSocketTransport() { close(); }

bool UdpSocketTransport::send(const std::uint8_t* data, std::size_t len,
                              std::uint64_t /*scheduled_ns*/) {
  if (fd_ < 0) return false;
  return ::send(fd_, data, len, 0) == static_cast<ssize_t>(len);
}

void UdpSocketTransport::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

RawPacketTransport::RawPacketTransport(const std::string& interface_name) {
  fd_ = ::socket(AF_PACKET, SOCK_RAW, htons(ETH_P_ALL));
  if (fd_ < 0)
    throw std::runtime_error("raw transport needs CAP_NET_RAW: " +
                             std::string(std::strerror(errno)));
  ifindex_ = static_cast<int>(::if_nametoindex(interface_name.c_str()));
  if (ifindex_ == 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("raw transport: unknown interface " + interface_name);
  }
}

RawPacketTransport::~RawPacketTransport() { close(); }

bool RawPacketTransport::send(const std::uint8_t* data, std::size_t len,
                              std::uint64_t /*scheduled_ns*/) {
  if (fd_ < 0) return false;
  sockaddr_ll addr{};
  addr.sll_family = AF_PACKET;
  addr.sll_ifindex = ifindex_;
  addr.sll_halen = 6;
  std::memcpy(addr.sll_addr, data, 6);  // destination MAC from the frame
  return ::sendto(fd_, data, len, 0, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) ==
         static_cast<ssize_t>(len);
}

void RawPacketTransport::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

#else  // !__linux__

UdpSocketTransport::UdpSocketTransport(const std::string&, std::uint16_t) {
  throw std::runtime_error("udp transport unavailable on this platform");
}
UdpSocketTransport::~UdpSocketTransport() = default;
bool UdpSocketTransport::send(const std::uint8_t*, std::size_t, std::uint64_t) { return false; }
void UdpSocketTransport::close() {}

RawPacketTransport::RawPacketTransport(const std::string&) {
  throw std::runtime_error("raw transport unavailable on this platform");
}
RawPacketTransport::~RawPacketTransport() = default;
bool RawPacketTransport::send(const std::uint8_t*, std::size_t, std::uint64_t) { return false; }
void RawPacketTransport::close() {}

#endif

}  // namespace dropkit

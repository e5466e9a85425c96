#include "dropkit/sender.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

namespace dropkit {

namespace {

void sleep_until_ns(std::uint64_t deadline_ns) {
  for (;;) {
    const std::uint64_t now = monotonic_ns();
    if (now >= deadline_ns) return;
    const std::uint64_t remaining = deadline_ns - now;
    if (remaining > 100'000) {
      std::this_thread::sleep_for(std::chrono::nanoseconds(remaining - 50'000));
    }
    // spin out the tail
    while (monotonic_ns() < deadline_ns) {
    }
    return;
  }
}

}  // namespace

StreamSender::StreamSender(const StreamConfig& cfg, Transport& transport,
                           const RawFrameConfig* raw)
    : cfg_(cfg), transport_(transport) {
  if (cfg.generators.empty())
    throw std::invalid_argument("stream " + std::to_string(cfg.stream_id) +
                                ": at least one generator required");
  if (raw != nullptr) {
    raw_ = true;
    frame_spec_ = raw->spec;
    frame_spec_.dst_port = cfg.port;
  }
}

SendSummary StreamSender::run(const StopCondition& stop) { return run_impl(stop, true); }
SendSummary StreamSender::run_virtual(const StopCondition& stop) { return run_impl(stop, false); }

SendSummary StreamSender::run_impl(const StopCondition& stop, bool real_time) {
  struct GenState {
    PatternGenerator gen;
    std::uint64_t next_deadline_ns;
    std::uint32_t weight;
  };
  std::vector<GenState> gens;
  gens.reserve(cfg_.generators.size());

  const std::uint64_t t0 = real_time ? monotonic_ns() : 0;
  for (const GeneratorConfig& g : cfg_.generators)
    gens.push_back({PatternGenerator(g), t0, std::max<std::uint32_t>(1, g.weight)});

  SendSummary s;
  s.next_packet_id = cfg_.initial_packet_id;

  std::vector<std::uint8_t> packet(kMaxSlotSize);
  std::vector<std::uint8_t> datagram_scratch(raw_ ? kMaxSlotSize : 0);
  std::uint64_t blocks_done = 0;
  std::uint64_t packet_id = cfg_.initial_packet_id;
  std::uint64_t virtual_now = 0;

  const auto stopped = [&]() {
    if (stop.max_packets && s.packets >= stop.max_packets) return true;
    if (stop.max_blocks && blocks_done >= stop.max_blocks) return true;
    if (stop.abort_flag && stop.abort_flag->load(std::memory_order_relaxed)) return true;
    if (stop.max_duration_ns) {
      const std::uint64_t now = real_time ? monotonic_ns() : virtual_now;
      if (now - t0 >= stop.max_duration_ns) return true;
    }
    return false;
  };

  bool failed = false;
  std::size_t gi = 0;
  while (!stopped() && !failed) {
    GenState& g = gens[gi];
    for (std::uint32_t turn = 0; turn < g.weight && !stopped(); ++turn) {
      const PayloadChunk chunk = g.gen.next_payload();

      DropHeader h;
      h.stream_id = cfg_.stream_id;
      h.payload_len = static_cast<std::uint16_t>(chunk.len);
      h.packet_id = packet_id;

      std::uint8_t* datagram = raw_ ? datagram_scratch.data() : packet.data();
      const auto enc = encode_header(h, datagram, kMaxSlotSize);
      if (!enc.ok()) throw std::runtime_error(std::string("header encode: ") + enc.violated_field);
      std::copy(chunk.data, chunk.data + chunk.len, datagram + kDropHeaderSize);
      std::size_t send_len = kDropHeaderSize + chunk.len;

      const std::uint8_t* wire = datagram;
      if (raw_) {
        send_len = build_frame(frame_spec_, datagram, send_len, packet.data(), packet.size());
        if (send_len == 0) throw std::runtime_error("frame does not fit the slot size");
        wire = packet.data();
      } else if (send_len > packet.size()) {
        throw std::runtime_error("datagram does not fit the slot size");
      }

      if (real_time) {
        sleep_until_ns(g.next_deadline_ns);
      } else {
        virtual_now = std::max(virtual_now, g.next_deadline_ns);
      }
      const std::uint64_t scheduled = real_time ? monotonic_ns() : g.next_deadline_ns;

      if (!transport_.send(wire, send_len, scheduled)) {
        failed = true;
        break;
      }
      g.next_deadline_ns += g.gen.packet_period_ns();
      ++packet_id;
      ++s.packets;
      s.payload_bytes += chunk.len;
      if (chunk.is_last_of_block) ++blocks_done;
    }
    gi = (gi + 1) % gens.size();
  }

  const std::uint64_t t1 = real_time ? monotonic_ns() : virtual_now;
  s.duration_ns = t1 - t0;
  s.next_packet_id = packet_id;
  s.complete = !failed;
  if (s.duration_ns > 0) {
    s.achieved_pps = static_cast<double>(s.packets) * 1e9 / static_cast<double>(s.duration_ns);
    s.achieved_bps =
        static_cast<double>(s.payload_bytes) * 8e9 / static_cast<double>(s.duration_ns);
  }
  return s;
}

}  // namespace dropkit

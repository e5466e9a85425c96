#include "dropkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dropkit/drop_header.hpp"
#include "dropkit/histogram.hpp"

namespace dropkit {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ull;
  x ^= x >> 33;
  return x;
}

FrameSpec default_frame_spec(std::size_t stream_index) {
  FrameSpec spec;
  spec.src_mac.bytes = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  spec.dst_mac.bytes = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
  spec.src_ip = 0x0a000001;  // 10.0.0.1
  spec.dst_ip = 0x0a000002;  // 10.0.0.2
  spec.src_port = static_cast<std::uint16_t>(40000 + stream_index);
  return spec;
}

// Records the virtual send timeline of one stream for merged replay.
struct RecordedPacket {
  std::uint64_t scheduled_ns;
  std::uint64_t packet_id;
  std::uint32_t payload_len;
  std::uint16_t stream_index;
};

class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(std::vector<RecordedPacket>& out, std::uint16_t stream_index)
      : out_(out), stream_index_(stream_index) {}
  bool send(const std::uint8_t* data, std::size_t len, std::uint64_t scheduled_ns) override {
    const auto dec = decode_header(data, len);
    if (!dec.ok()) return false;
    out_.push_back({scheduled_ns, dec.header.packet_id, dec.header.payload_len, stream_index_});
    return true;
  }
  void close() override {}

 private:
  std::vector<RecordedPacket>& out_;
  std::uint16_t stream_index_;
};

}  // namespace

Harness::Harness(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

namespace {
// distinct deterministic fault sequence per stream of one run
std::uint64_t stream_fault_seed(std::uint64_t plan_seed, std::size_t stream_index) {
  return mix64(plan_seed + 0x9e3779b97f4a7c15ull * (stream_index + 1));
}
}  // namespace

RunOutput Harness::run_streams(const ExperimentConfig& cfg) {
  if (cfg.streams.empty()) throw std::invalid_argument("no streams configured");

  const bool raw = cfg.transport == TransportChoice::Raw;
  const bool udp = cfg.transport == TransportChoice::Udp;

  std::vector<StreamBinding> bindings;
  for (const auto& s : cfg.streams) bindings.push_back({s.port, s.stream_id});

  ReceiverConfig rcfg;
  rcfg.slot_count = cfg.slot_ring.slot_count;
  rcfg.slot_size = cfg.slot_ring.slot_size;
  rcfg.raw_frames = raw;
  rcfg.histogram_enabled = cfg.params.histogram;
  rcfg.abort_on_event = cfg.params.abort_on_event;
  rcfg.placement = cfg.placement;
  rcfg.core_map = cfg.core_map;
  rcfg.expected_first_id = cfg.expected_first_id;

  Receiver receiver(bindings, rcfg);

  // transports before start(), endpoints are created on demand
  std::vector<std::unique_ptr<Transport>> transports;
  std::vector<FaultInjectingTransport*> fault_layers(cfg.streams.size(), nullptr);
  if (udp) {
    receiver.open_udp_sockets();
    for (const auto& s : cfg.streams)
      transports.push_back(std::make_unique<UdpSocketTransport>(s.address, s.port));
  } else {
    for (std::size_t i = 0; i < cfg.streams.size(); ++i) {
      std::unique_ptr<Transport> t =
          std::make_unique<LoopbackTransport>(receiver.loopback_endpoint(i));
      // a seeded plan with zero probabilities still records the ground truth
      if (!cfg.faults.is_noop() || cfg.faults.seed != 0) {
        FaultPlan plan = cfg.faults;
        plan.seed = stream_fault_seed(cfg.faults.seed, i);
        auto faulted = std::make_unique<FaultInjectingTransport>(
            std::move(t), plan, raw ? kRawFrameOverhead : 0);
        fault_layers[i] = faulted.get();
        t = std::move(faulted);
      }
      transports.push_back(std::move(t));
    }
  }

  receiver.start();

  StopCondition stop;
  stop.max_packets = cfg.packets_per_stream;
  stop.max_duration_ns = cfg.duration_s * 1'000'000'000ull;
  stop.abort_flag = &receiver.abort_flag();

  const std::uint64_t t0 = monotonic_ns();
  std::vector<SendSummary> summaries(cfg.streams.size());
  std::vector<std::thread> sender_threads;
  std::vector<RawFrameConfig> raw_cfgs(cfg.streams.size());
  for (std::size_t i = 0; i < cfg.streams.size(); ++i) {
    raw_cfgs[i].spec = default_frame_spec(i);
    sender_threads.emplace_back([&, i] {
      StreamSender sender(cfg.streams[i], *transports[i], raw ? &raw_cfgs[i] : nullptr);
      summaries[i] = sender.run(stop);
      transports[i]->close();
    });
  }

  // periodic stats snapshots while the run is in flight
  std::atomic<bool> run_done{false};
  std::thread monitor;
  if (!cfg.out_dir.empty() && cfg.stats_interval_s > 0) {
    monitor = std::thread([&] {
      const auto path = std::filesystem::path(cfg.out_dir) / "rx-stats.json";
      std::mutex mu;
      std::condition_variable cv;
      std::unique_lock<std::mutex> lock(mu);
      while (!run_done.load(std::memory_order_acquire)) {
        cv.wait_for(lock, std::chrono::seconds(cfg.stats_interval_s));
        write_file(path.string(), receiver.stats_snapshot().to_json() + "\n");
      }
    });
  }

  for (auto& t : sender_threads) t.join();
  receiver.stop_and_drain();
  run_done.store(true, std::memory_order_release);
  if (monitor.joinable()) monitor.join();

  RunOutput out;
  out.wall_ns = monotonic_ns() - t0;
  out.sends = std::move(summaries);
  out.stats = receiver.stats_snapshot();
  for (std::size_t i = 0; i < cfg.streams.size(); ++i) {
    out.audits.push_back(receiver.audit_report(i));
    out.histograms.push_back(receiver.histogram(i));
    if (fault_layers[i]) out.fault_truths.push_back(fault_layers[i]->ground_truth());
  }
  out.slots_clean = receiver.slot_ownership_clean();
  if (!cfg.out_dir.empty())
    write_file((std::filesystem::path(cfg.out_dir) / "rx-stats.json").string(),
               out.stats.to_json() + "\n");
  return out;
}

VirtualProbeResult Harness::virtual_probe(const std::vector<StreamConfig>& streams,
                                          const ServerCostModel& model,
                                          std::uint64_t packets_per_stream) const {
  std::vector<RecordedPacket> merged;
  merged.reserve(streams.size() * packets_per_stream);

  for (std::size_t i = 0; i < streams.size(); ++i) {
    std::vector<RecordedPacket> one;
    one.reserve(packets_per_stream);
    RecordingTransport rec(one, static_cast<std::uint16_t>(i));
    StreamSender sender(streams[i], rec);
    StopCondition stop;
    stop.max_packets = packets_per_stream;
    sender.run_virtual(stop);
    // stagger stream starts so simultaneous first packets do not collide
    if (!one.empty() && streams.size() > 1 && one.size() > 1) {
      const std::uint64_t period = one[1].scheduled_ns - one[0].scheduled_ns;
      const std::uint64_t offset = period * i / streams.size();
      for (auto& p : one) p.scheduled_ns += offset;
    }
    merged.insert(merged.end(), one.begin(), one.end());
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const RecordedPacket& a, const RecordedPacket& b) {
                     if (a.scheduled_ns != b.scheduled_ns) return a.scheduled_ns < b.scheduled_ns;
                     return a.stream_index < b.stream_index;
                   });

  VirtualProbeResult r;
  r.offered = merged.size();
  if (merged.empty()) return r;

  CostModelState server(model);
  std::vector<AuditState> audits;
  for (std::size_t i = 0; i < streams.size(); ++i)
    audits.emplace_back(streams[i].stream_id);

  for (const RecordedPacket& p : merged) {
    if (!server.admit(kDropHeaderSize + p.payload_len, p.scheduled_ns)) continue;
    ++r.delivered;
    r.payload_bytes_delivered += p.payload_len;
    audits[p.stream_index].observe(p.packet_id, p.scheduled_ns);
  }
  for (const auto& a : audits) {
    r.audit_events += a.report().events.size() + a.report().events_dropped;
    r.missing += a.report().total_missing;
  }
  r.span_ns = merged.back().scheduled_ns - merged.front().scheduled_ns;
  if (r.span_ns == 0) r.span_ns = 1;
  r.measured_pps = static_cast<double>(r.delivered) * 1e9 / static_cast<double>(r.span_ns);
  r.expected_pps = static_cast<double>(r.offered) * 1e9 / static_cast<double>(r.span_ns);
  return r;
}

// ---------------------------------------------------------------------------

PhaseReport Harness::phase_max_rate() {
  if (cfg_.streams.empty()) throw std::invalid_argument("max-rate: at least one stream required");
  PhaseReport report;
  report.phase = to_string(Phase::MaxRate);

  const std::uint32_t max_streams =
      std::max<std::uint32_t>(cfg_.params.max_streams, 1);

  RunOutput last;
  for (std::uint32_t n = 1; n <= max_streams; ++n) {
    ExperimentConfig step = cfg_;
    step.out_dir.clear();
    step.streams.clear();
    for (std::uint32_t i = 0; i < n; ++i) {
      StreamConfig s = cfg_.streams[i % cfg_.streams.size()];
      s.stream_id = static_cast<std::uint16_t>(i);
      s.port = static_cast<std::uint16_t>(cfg_.streams[0].port + i);
      if (cfg_.params.per_stream_rate_pps > 0) {
        for (auto& g : s.generators) {
          g.target_rate_bps = cfg_.params.per_stream_rate_pps * 8.0 * g.packet_size;
          g.pause_ns = 0;
        }
      }
      step.streams.push_back(std::move(s));
    }
    if (step.duration_s == 0 && step.packets_per_stream == 0) step.duration_s = 2;

    RunOutput out = run_streams(step);
    std::uint64_t received = 0, bytes = 0, events = 0, missing = 0;
    for (const auto& st : out.stats.streams) {
      received += st.packets;
      bytes += st.bytes;
    }
    for (const auto& a : out.audits) {
      events += a.events.size() + a.events_dropped;
      missing += a.total_missing;
    }
    const double secs = static_cast<double>(out.wall_ns) / 1e9;

    PhaseRow row;
    row.parameters = {{"streams", std::to_string(n)}};
    row.packet_rate_pps = secs > 0 ? static_cast<double>(received) / secs : 0;
    row.data_rate_bps = secs > 0 ? static_cast<double>(bytes) * 8 / secs : 0;
    row.packets_received = received;
    row.bytes_received = bytes;
    row.loss_events = events;
    row.packets_missing = missing;
    // loss is ignored by design in this phase
    row.upper_limit_ratio = loss_upper_limit(received, missing).value_or(0);
    row.note = "loss ignored";
    report.rows.push_back(row);
    last = std::move(out);
  }
  report.final_audits = last.audits;
  report.pass = report.rows.size() == max_streams;
  std::ostringstream os;
  os << "max total rate " << std::max_element(report.rows.begin(), report.rows.end(),
                                              [](const PhaseRow& a, const PhaseRow& b) {
                                                return a.packet_rate_pps < b.packet_rate_pps;
                                              })
                                 ->packet_rate_pps
     << " p/s (host-bound, reported not asserted)";
  report.summary = os.str();
  return report;
}

PhaseReport Harness::phase_lossless_rate() {
  if (cfg_.streams.empty())
    throw std::invalid_argument("lossless-rate: at least one stream required");
  PhaseReport report;
  report.phase = to_string(Phase::LosslessRate);

  const bool simulated = cfg_.transport == TransportChoice::SimCost;
  const ServerCostModel model{cfg_.params.cost_base_ns, cfg_.params.cost_per_segment_ns, 64,
                              kDropHeaderSize};

  double rate = cfg_.params.start_rate_pps;
  for (int step = 0; step < 256; ++step) {
    std::vector<StreamConfig> streams = cfg_.streams;
    for (auto& s : streams)
      for (auto& g : s.generators) {
        g.target_rate_bps = rate * 8.0 * g.packet_size;
        g.pause_ns = 0;
      }

    double ratio;
    VirtualProbeResult probe;
    if (simulated) {
      probe = virtual_probe(streams, model, cfg_.params.probe_packets);
      ratio = probe.offered ? static_cast<double>(probe.delivered) /
                                  static_cast<double>(probe.offered)
                            : 0;
    } else {
      ExperimentConfig stepcfg = cfg_;
      stepcfg.out_dir.clear();
      stepcfg.streams = streams;
      stepcfg.packets_per_stream = cfg_.params.probe_packets;
      stepcfg.duration_s = 0;
      RunOutput out = run_streams(stepcfg);
      std::uint64_t sent = 0, received = 0;
      for (const auto& s : out.sends) sent += s.packets;
      for (const auto& st : out.stats.streams) received += st.packets;
      probe.offered = sent;
      probe.delivered = received;
      for (const auto& a : out.audits) {
        probe.audit_events += a.events.size() + a.events_dropped;
        probe.missing += a.total_missing;
      }
      ratio = sent ? static_cast<double>(received) / static_cast<double>(sent) : 0;
    }

    PhaseRow row;
    row.parameters = {{"expected_pps_per_stream", std::to_string(std::llround(rate))},
                      {"streams", std::to_string(streams.size())}};
    row.packet_rate_pps = rate * static_cast<double>(streams.size()) * ratio;
    row.data_rate_bps = row.packet_rate_pps * 8.0 *
                        static_cast<double>(streams[0].generators[0].packet_size);
    row.packets_received = probe.delivered;
    row.bytes_received = probe.payload_bytes_delivered;
    row.loss_events = probe.audit_events;
    row.packets_missing = probe.missing;
    row.upper_limit_ratio = loss_upper_limit(probe.delivered, probe.missing).value_or(0);
    row.pass = true;
    {
      std::ostringstream os;
      os << "ratio=" << ratio;
      row.note = os.str();
    }
    report.rows.push_back(row);

    if (ratio < cfg_.params.stop_ratio) break;  // loss onset found
    rate *= cfg_.params.rate_step_factor;
  }
  report.pass = !report.rows.empty();
  report.summary = "loss onset after " + std::to_string(report.rows.size()) + " steps";
  return report;
}

std::vector<std::uint32_t> Harness::size_sweep_sizes() {
  std::set<std::uint32_t> sizes;
  for (std::uint32_t s = 64; s <= 512; s += 64) sizes.insert(s);
  sizes.insert(1024);
  sizes.insert(2048);
  std::set<std::uint32_t> with_plus_one = sizes;
  for (std::uint32_t s : sizes)
    if (s + 1 <= kMaxSlotSize) with_plus_one.insert(s + 1);  // 2049 never fits a slot
  return {with_plus_one.begin(), with_plus_one.end()};
}

PhaseReport Harness::phase_size_sweep() {
  PhaseReport report;
  report.phase = to_string(Phase::SizeSweep);
  const ServerCostModel model{cfg_.params.cost_base_ns, cfg_.params.cost_per_segment_ns, 64,
                              kDropHeaderSize};
  const std::uint64_t probe_packets = std::max<std::uint64_t>(cfg_.params.probe_packets, 16);

  StreamConfig base =
      cfg_.streams.empty() ? StreamConfig{0, "127.0.0.1", 9000, 0, {GeneratorConfig{}}}
                           : cfg_.streams[0];
  if (base.generators.empty()) base.generators.push_back(GeneratorConfig{});

  const std::uint32_t capacity =
      static_cast<std::uint32_t>(max_payload_for_slot(cfg_.slot_ring.slot_size, false));

  for (const std::uint32_t size : size_sweep_sizes()) {
    PhaseRow row;
    row.parameters = {{"payload", std::to_string(size)}};
    if (size > capacity) {
      row.pass = true;
      row.note = "skipped: exceeds slot payload capacity of " + std::to_string(capacity);
      report.rows.push_back(row);
      continue;
    }

    StreamConfig s = base;
    for (auto& g : s.generators) {
      g.packet_size = size;
      g.block_size = std::uint64_t{size} * probe_packets;  // no short tail packets
      g.pause_ns = 0;
      g.target_rate_bps = 0;
    }

    // lossless iff the inter-packet period is at least the per-packet cost;
    // bracket the minimal lossless period, then bisect
    const auto lossless = [&](std::uint64_t period_ns) {
      StreamConfig probe_stream = s;
      probe_stream.generators[0].pause_ns = period_ns;
      probe_stream.generators[0].line_rate_bps = 0;  // pause is the full period
      const VirtualProbeResult pr = virtual_probe({probe_stream}, model, probe_packets);
      return pr.delivered == pr.offered && pr.audit_events == 0;
    };

    std::uint64_t hi = 1;
    while (!lossless(hi)) hi *= 2;
    std::uint64_t lo = hi / 2;  // 0 when hi == 1
    while (lo + 1 < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (lossless(mid) ? hi : lo) = mid;
    }
    const std::uint64_t min_period = hi;

    const VirtualProbeResult pr = [&] {
      StreamConfig probe_stream = s;
      probe_stream.generators[0].pause_ns = min_period;
      probe_stream.generators[0].line_rate_bps = 0;
      return virtual_probe({probe_stream}, model, probe_packets);
    }();

    row.packet_rate_pps = 1e9 / static_cast<double>(min_period);
    row.data_rate_bps = row.packet_rate_pps * 8.0 * size;
    row.packets_received = pr.delivered;
    row.bytes_received = pr.payload_bytes_delivered;
    row.loss_events = pr.audit_events;
    row.packets_missing = pr.missing;
    row.upper_limit_ratio = loss_upper_limit(pr.delivered, pr.missing).value_or(0);
    row.note = "min lossless period " + std::to_string(min_period) + " ns";
    report.rows.push_back(row);
  }

  report.pass = report.rows.size() == size_sweep_sizes().size();
  report.summary = "rates are model-bound; step shape at segment boundaries";
  return report;
}

PhaseReport Harness::phase_assignment_search() {
  if (cfg_.streams.empty())
    throw std::invalid_argument("assign-search: at least one stream required");
  PhaseReport report;
  report.phase = to_string(Phase::AssignmentSearch);

  const auto plans = enumerate_assignments(
      static_cast<std::uint32_t>(cfg_.streams.size()), cfg_.params.rule_w);
  if (plans.empty()) {
    report.pass = false;
    report.summary = "no feasible assignment for this stream count";
    return report;
  }

  std::vector<PlanOutcome> outcomes;
  RunOutput last;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    ExperimentConfig step = cfg_;
    step.out_dir.clear();
    step.placement = plans[i];
    if (step.duration_s == 0 && step.packets_per_stream == 0) step.duration_s = 1;

    RunOutput out = run_streams(step);
    std::uint64_t received = 0, missing = 0, bytes = 0, events = 0;
    for (const auto& a : out.audits) {
      missing += a.total_missing;
      events += a.events.size() + a.events_dropped;
    }
    for (const auto& st : out.stats.streams) {
      received += st.packets;
      bytes += st.bytes;
    }
    const double secs = static_cast<double>(out.wall_ns) / 1e9;
    const double pps = secs > 0 ? static_cast<double>(received) / secs : 0;
    const double loss = received + missing
                            ? static_cast<double>(missing) / static_cast<double>(received + missing)
                            : 0.0;
    outcomes.push_back({i, loss, pps});

    PhaseRow row;
    row.parameters = {{"plan", std::to_string(i)}, {"assignment", plans[i].describe()}};
    row.packet_rate_pps = pps;
    row.data_rate_bps = secs > 0 ? static_cast<double>(bytes) * 8 / secs : 0;
    row.packets_received = received;
    row.bytes_received = bytes;
    row.loss_events = events;
    row.packets_missing = missing;
    row.upper_limit_ratio = loss_upper_limit(received, missing).value_or(0);
    report.rows.push_back(row);
    last = std::move(out);
  }

  const auto ranking = rank_plans(outcomes);
  for (std::size_t rank = 0; rank < ranking.size(); ++rank)
    report.rows[ranking[rank]].parameters.push_back({"rank", std::to_string(rank)});
  report.final_audits = last.audits;
  report.pass = report.rows.size() == plans.size();
  report.summary = "best: plan " + std::to_string(ranking.front()) + " " +
                   plans[ranking.front()].describe();
  return report;
}

std::vector<std::size_t> Harness::rank_plans(const std::vector<PlanOutcome>& outcomes) {
  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (outcomes[a].loss_ratio != outcomes[b].loss_ratio)
      return outcomes[a].loss_ratio < outcomes[b].loss_ratio;
    if (outcomes[a].achieved_pps != outcomes[b].achieved_pps)
      return outcomes[a].achieved_pps > outcomes[b].achieved_pps;
    return outcomes[a].plan_index < outcomes[b].plan_index;
  });
  return order;
}

PhaseReport Harness::phase_soak() {
  if (cfg_.streams.empty()) throw std::invalid_argument("soak: at least one stream required");
  for (const auto& s : cfg_.streams)
    for (const auto& g : s.generators) {
      if (g.pattern != PatternKind::Counting16)
        throw std::invalid_argument("soak: verification requires the counting16 pattern");
      if (g.block_size % 16384 != 0)
        throw std::invalid_argument("soak: block_size must be a multiple of 16384 bytes");
    }

  PhaseReport report;
  report.phase = to_string(Phase::Soak);
  ExperimentConfig run_cfg = cfg_;
  RunOutput out = run_streams(run_cfg);

  bool all_pass = true;
  std::uint64_t total_received = 0, total_missing = 0;
  for (std::size_t i = 0; i < cfg_.streams.size(); ++i) {
    const AuditReport& audit = out.audits[i];
    const WordHistogram& hist = out.histograms[i];
    const auto& st = out.stats.streams[i];

    const UniformityCheck uc = check_uniform(hist);
    // generators start the pattern at 0 and after the receiver, so the
    // fuller area of a lossless run must begin at word 0
    const bool hist_ok = uc.pass && (uc.spread == 0 || uc.max_range_start == 0);
    const bool sum_ok = check_sum(hist, st.bytes);
    const std::uint64_t events = audit.events.size() + audit.events_dropped;
    const bool stream_pass = events == 0 && hist_ok && sum_ok &&
                             audit.accounting_identity_holds();
    all_pass = all_pass && stream_pass;
    total_received += st.packets;
    total_missing += audit.total_missing;

    PhaseRow row;
    row.parameters = {{"stream", std::to_string(cfg_.streams[i].stream_id)}};
    const double secs = static_cast<double>(out.wall_ns) / 1e9;
    row.packet_rate_pps = secs > 0 ? static_cast<double>(st.packets) / secs : 0;
    row.data_rate_bps = secs > 0 ? static_cast<double>(st.bytes) * 8 / secs : 0;
    row.packets_received = st.packets;
    row.bytes_received = st.bytes;
    row.loss_events = events;
    row.packets_missing = audit.total_missing;
    row.upper_limit_ratio = loss_upper_limit(st.packets, audit.total_missing).value_or(0);
    row.pass = stream_pass;
    row.note = "hist " + uc.describe() + (sum_ok ? ", sum ok" : ", SUM MISMATCH");
    report.rows.push_back(row);

    if (!cfg_.out_dir.empty()) {
      const auto dir = std::filesystem::path(cfg_.out_dir);
      const std::string stem = "stream-" + std::to_string(cfg_.streams[i].stream_id);
      render_histogram(hist, (dir / (stem + "-hist.pgm")).string(),
                       (dir / (stem + "-hist.csv")).string());
      write_file((dir / (stem + "-audit.json")).string(), audit.to_json() + "\n");
      write_file((dir / (stem + "-events.csv")).string(), events_to_csv(audit.events));
    }
  }
  report.final_audits = out.audits;
  report.pass = all_pass && out.slots_clean;
  std::ostringstream os;
  os << "received " << total_received << " packets, upper limit "
     << loss_upper_limit(total_received, total_missing).value_or(0);
  report.summary = os.str();
  return report;
}

PhaseReport Harness::phase_fault_oracle() {
  PhaseReport report;
  report.phase = to_string(Phase::FaultOracle);

  StreamConfig base = cfg_.streams.empty()
                          ? StreamConfig{0, "127.0.0.1", 9000, 0, {GeneratorConfig{}}}
                          : cfg_.streams[0];
  if (base.generators.empty()) base.generators.push_back(GeneratorConfig{});

  bool all_pass = true;
  for (std::uint32_t run = 0; run < cfg_.params.oracle_runs; ++run) {
    ExperimentConfig step = cfg_;
    step.out_dir.clear();
    step.streams = {base};
    step.packets_per_stream = cfg_.params.oracle_packets;
    step.duration_s = 0;
    // deterministic per-run plan: probabilities cycle within the cap
    const std::uint64_t rs = mix64(cfg_.seed + run);
    step.faults.seed = rs;
    step.faults.drop_prob = cfg_.params.max_fault_prob * ((run % 4) + 1) / 4.0;
    step.faults.dup_prob = cfg_.params.max_fault_prob * ((run % 3) + 1) / 3.0;
    step.faults.reorder_prob = cfg_.params.max_fault_prob * ((run % 5) + 1) / 5.0;
    step.faults.reorder_depth = 1 + run % 4;
    step.faults.drop_at.clear();

    RunOutput out = run_streams(step);
    AuditReport audit = out.audits[0];
    if (cfg_.params.oracle_self_test && run == 0) {
      // prove the checker can fail: corrupt one event (or forge one)
      if (!audit.events.empty())
        audit.events[0].at_packet_id ^= 1;
      else
        audit.events.push_back({AuditEventKind::Missing, 1, 42, 7, 0});
    }
    const ReconcileDiff diff = reconcile(audit, out.fault_truths[0].delivered_ids);
    const bool run_pass = diff.empty();
    all_pass = all_pass && run_pass;

    PhaseRow row;
    row.parameters = {{"run", std::to_string(run)},
                      {"seed", std::to_string(rs)},
                      {"dropped", std::to_string(out.fault_truths[0].dropped)},
                      {"duplicated", std::to_string(out.fault_truths[0].duplicated)},
                      {"reordered", std::to_string(out.fault_truths[0].reordered)}};
    row.packets_received = out.stats.streams[0].packets;
    row.bytes_received = out.stats.streams[0].bytes;
    row.loss_events = out.audits[0].events.size() + out.audits[0].events_dropped;
    row.packets_missing = out.audits[0].total_missing;
    row.upper_limit_ratio =
        loss_upper_limit(row.packets_received, row.packets_missing).value_or(0);
    row.pass = run_pass;
    row.note = run_pass ? "audit matches ground truth"
                        : "DIFF: " + diff.mismatches.front();
    report.rows.push_back(row);
  }
  report.pass = all_pass;
  report.summary = all_pass ? "all runs reconciled exactly against the delivery ground truth"
                            : "reconcile mismatches found";
  return report;
}

void Harness::write_outputs(const PhaseReport& report, const RunOutput* /*final_run*/) {
  if (cfg_.out_dir.empty()) return;
  const auto dir = std::filesystem::path(cfg_.out_dir);
  std::filesystem::create_directories(dir);
  save_config_file(cfg_, (dir / "config.json").string());
  write_file((dir / "report.csv").string(), report.to_csv());
  write_file((dir / "report.json").string(), report.to_json() + "\n");
  write_file((dir / "report.txt").string(), report.to_table());
}

PhaseReport Harness::run() {
  if (!cfg_.out_dir.empty())
    std::filesystem::create_directories(std::filesystem::path(cfg_.out_dir));
  PhaseReport report;
  switch (cfg_.phase) {
    case Phase::MaxRate: report = phase_max_rate(); break;
    case Phase::LosslessRate: report = phase_lossless_rate(); break;
    case Phase::SizeSweep: report = phase_size_sweep(); break;
    case Phase::AssignmentSearch: report = phase_assignment_search(); break;
    case Phase::Soak: report = phase_soak(); break;
    case Phase::FaultOracle: report = phase_fault_oracle(); break;
  }
  write_outputs(report, nullptr);
  return report;
}

}  // namespace dropkit

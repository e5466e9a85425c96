#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dropkit/config.hpp"
#include "dropkit/receiver.hpp"
#include "dropkit/report.hpp"
#include "dropkit/sender.hpp"
#include "dropkit/transport.hpp"

// Orchestration of the measurement phases:
//   1. max-rate        total packet rate the host sustains, loss ignored
//   2. lossless-rate   pause sweep from long to short; loss onset and the
//                      measured/expected rate ratio per step
//   3. size-sweep      max lossless rate per payload size over the exact
//                      size set (powers of two up to 2048, multiples of 64
//                      up to 512, and each size plus one byte)
//   4. assign-search   thread placement plans ranked by loss, then rate
//   5. soak            long lossless run with histogram verification
//   6. fault-oracle    seeded fault matrix cross-checked against the
//                      delivery ground truth
//
// Phases run senders and a receiver in-process. The simulated transport
// (sim-cost) replaces wall-clock pacing with a deterministic virtual
// timeline, which makes sweep results reproducible bit for bit.

namespace dropkit {

// Outcome of one multi-stream run.
struct RunOutput {
  std::vector<SendSummary> sends;
  std::vector<AuditReport> audits;
  std::vector<WordHistogram> histograms;
  RxStatsSnapshot stats;
  std::vector<FaultGroundTruth> fault_truths;
  bool slots_clean = true;
  std::uint64_t wall_ns = 0;
};

// Deterministic virtual-time probe: all streams' schedules merged by
// timestamp through a shared server cost model, per-stream audits on what
// survives.
struct VirtualProbeResult {
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t audit_events = 0;
  std::uint64_t missing = 0;
  std::uint64_t span_ns = 0;  // first to last offered arrival
  double measured_pps = 0;
  double expected_pps = 0;
  std::uint64_t payload_bytes_delivered = 0;
};

struct PlanOutcome {
  std::size_t plan_index = 0;
  double loss_ratio = 0;
  double achieved_pps = 0;
};

class Harness {
 public:
  explicit Harness(ExperimentConfig cfg);

  // Runs the configured phase, writes artifacts to out_dir (when set), and
  // returns the report. PhaseReport::pass is the process exit criterion.
  PhaseReport run();

  PhaseReport phase_max_rate();
  PhaseReport phase_lossless_rate();
  PhaseReport phase_size_sweep();
  PhaseReport phase_assignment_search();
  PhaseReport phase_soak();
  PhaseReport phase_fault_oracle();

  // The exact size set of the sweep: multiples of 64 up to 512, the powers
  // of two 1024 and 2048, and each size plus one byte; 2049 can never fit a
  // slot and is excluded.
  static std::vector<std::uint32_t> size_sweep_sizes();

  // Loss-then-rate ranking with the lower plan index winning ties.
  static std::vector<std::size_t> rank_plans(const std::vector<PlanOutcome>& outcomes);

  // One realtime run of cfg's streams over loopback/udp/raw transports.
  RunOutput run_streams(const ExperimentConfig& cfg);

  VirtualProbeResult virtual_probe(const std::vector<StreamConfig>& streams,
                                   const ServerCostModel& model,
                                   std::uint64_t packets_per_stream) const;

  const ExperimentConfig& config() const { return cfg_; }

 private:
  void write_outputs(const PhaseReport& report, const RunOutput* final_run);

  ExperimentConfig cfg_;
};

}  // namespace dropkit

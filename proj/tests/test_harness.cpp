#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "dropkit/harness.hpp"
#include "dropkit/svg_chart.hpp"

using namespace dropkit;

namespace {

StreamConfig stream_of(std::uint16_t id, std::uint16_t port, std::uint32_t packet_size,
                       std::uint64_t block_size) {
  GeneratorConfig g;
  g.packet_size = packet_size;
  g.block_size = block_size;
  StreamConfig s;
  s.stream_id = id;
  s.port = port;
  s.generators = {g};
  return s;
}

}  // namespace

TEST_CASE("the size sweep iterates the exact published size set") {
  const std::vector<std::uint32_t> expected = {64,  65,  128, 129, 192, 193, 256,
                                               257, 320, 321, 384, 385, 448, 449,
                                               512, 513, 1024, 1025, 2048};
  CHECK(Harness::size_sweep_sizes() == expected);
}

TEST_CASE("plan ranking: loss first, then rate, then plan index") {
  std::vector<PlanOutcome> outcomes = {
      {0, 0.1, 500}, {1, 0.0, 100}, {2, 0.0, 300}, {3, 0.0, 300},
  };
  const auto order = Harness::rank_plans(outcomes);
  CHECK(order == std::vector<std::size_t>{2, 3, 1, 0});
}

TEST_CASE("max-rate refuses an empty stream set and reports one row per step") {
  ExperimentConfig cfg;
  cfg.phase = Phase::MaxRate;
  cfg.params.max_streams = 3;
  CHECK_THROWS(Harness(cfg).phase_max_rate());

  cfg.streams = {stream_of(0, 9000, 64, 65536)};
  cfg.packets_per_stream = 20000;
  Harness h(cfg);
  const PhaseReport r = h.phase_max_rate();
  REQUIRE(r.rows.size() == 3);
  CHECK(r.pass);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.rows[i].parameter("streams") == std::to_string(i + 1));
    CHECK(r.rows[i].packets_received == 20000 * (i + 1));
  }
}

TEST_CASE("lossless-rate over plain loopback keeps the ratio at one") {
  ExperimentConfig cfg;
  cfg.phase = Phase::LosslessRate;
  cfg.transport = TransportChoice::Loopback;
  cfg.streams = {stream_of(0, 9000, 350, 35000)};
  cfg.params.start_rate_pps = 20000;
  cfg.params.rate_step_factor = 4.0;
  cfg.params.probe_packets = 3000;
  cfg.params.stop_ratio = 0.85;
  Harness h(cfg);
  const PhaseReport r = h.phase_lossless_rate();
  REQUIRE(!r.rows.empty());
  for (const auto& row : r.rows) {
    CHECK(row.loss_events == 0);
    CHECK(row.packets_missing == 0);
  }
}

TEST_CASE("lossless-rate against a capacity model departs from one at the capacity") {
  ExperimentConfig cfg;
  cfg.phase = Phase::LosslessRate;
  cfg.transport = TransportChoice::SimCost;
  cfg.streams = {stream_of(0, 9000, 350, 35000)};
  // server capacity: 1e9/2000 = 500k packets/s
  cfg.params.cost_base_ns = 2000;
  cfg.params.cost_per_segment_ns = 0;
  cfg.params.start_rate_pps = 100000;
  cfg.params.rate_step_factor = 1.5;
  cfg.params.probe_packets = 5000;
  Harness h(cfg);
  const PhaseReport r = h.phase_lossless_rate();
  REQUIRE(r.rows.size() >= 2);

  for (const auto& row : r.rows) {
    const double expected = std::stod(row.parameter("expected_pps_per_stream"));
    if (expected <= 450000) {
      CHECK(row.packets_missing == 0);  // below capacity nothing is lost
    }
  }
  // the last row crossed the capacity and lost packets
  CHECK(r.rows.back().packets_missing > 0);
}

TEST_CASE("the four-stream capacity split keeps every stream below its share") {
  // four streams at a quarter of capacity each stay lossless
  ExperimentConfig cfg;
  cfg.transport = TransportChoice::SimCost;
  std::vector<StreamConfig> streams;
  for (std::uint16_t i = 0; i < 4; ++i) {
    StreamConfig s = stream_of(i, 9000 + i, 350, 35000);
    s.generators[0].target_rate_bps = 350 * 8 * 100000;  // 100k p/s each
    streams.push_back(s);
  }
  Harness h(cfg);
  const ServerCostModel model{2000, 0, 64, kDropHeaderSize};  // 500k p/s
  const VirtualProbeResult probe = h.virtual_probe(streams, model, 10000);
  CHECK(probe.offered == 40000);
  CHECK(probe.delivered == probe.offered);
  CHECK(probe.audit_events == 0);
}

TEST_CASE("assignment search runs every plan and ranks deterministically") {
  ExperimentConfig cfg;
  cfg.phase = Phase::AssignmentSearch;
  cfg.streams = {stream_of(0, 9000, 64, 65536), stream_of(1, 9001, 64, 65536)};
  cfg.packets_per_stream = 2000;
  cfg.params.rule_w = true;
  Harness h(cfg);
  const PhaseReport r = h.phase_assignment_search();
  REQUIRE(r.rows.size() == 6);
  CHECK(r.pass);
  // loopback loses nothing; the winner is decided by rate, never by loss
  for (const auto& row : r.rows) {
    CHECK(row.packets_missing == 0);
    CHECK_FALSE(row.parameter("rank").empty());
  }
  CHECK(r.summary.find("best: plan") != std::string::npos);

  cfg.params.rule_w = false;
  cfg.streams = {stream_of(0, 9000, 64, 65536)};
  Harness h16(cfg);
  CHECK(h16.phase_assignment_search().rows.size() == 16);
}

TEST_CASE("soak validates generator invariants up front") {
  ExperimentConfig cfg;
  cfg.phase = Phase::Soak;
  cfg.streams = {stream_of(0, 9000, 2000, 16000)};  // not a multiple of 16384
  cfg.packets_per_stream = 10;
  CHECK_THROWS(Harness(cfg).phase_soak());

  cfg.streams = {stream_of(0, 9000, 2000, 16384000)};
  cfg.streams[0].generators[0].pattern = PatternKind::Prng;
  CHECK_THROWS(Harness(cfg).phase_soak());
}

TEST_CASE("a small soak passes every check and renders artifacts") {
  const std::string out = "./soak-test-out";
  std::filesystem::remove_all(out);

  ExperimentConfig cfg;
  cfg.phase = Phase::Soak;
  cfg.out_dir = out;
  cfg.streams = {stream_of(0, 9000, 2000, 16384000), stream_of(1, 9001, 2000, 16384000)};
  cfg.packets_per_stream = 30000;
  Harness h(cfg);
  const PhaseReport r = h.run();
  REQUIRE(r.rows.size() == 2);
  CHECK(r.pass);
  for (const auto& row : r.rows) {
    CHECK(row.pass);
    CHECK(row.loss_events == 0);
    CHECK(row.packets_received == 30000);
    CHECK(row.bytes_received == 60000000);
  }

  namespace fs = std::filesystem;
  for (const char* f : {"config.json", "report.csv", "report.json", "report.txt",
                        "rx-stats.json", "stream-0-hist.pgm", "stream-0-hist.csv",
                        "stream-0-audit.json", "stream-0-events.csv", "stream-1-hist.pgm"}) {
    CHECK_MESSAGE(fs::exists(fs::path(out) / f), f);
  }
  std::filesystem::remove_all(out);
}

TEST_CASE("a soak with one injected drop fails both the audit and the histogram") {
  ExperimentConfig cfg;
  cfg.phase = Phase::Soak;
  cfg.streams = {stream_of(0, 9000, 2000, 16384000)};
  cfg.packets_per_stream = 30000;
  cfg.faults.seed = 9;
  cfg.faults.drop_at = {17777};
  Harness h(cfg);
  const PhaseReport r = h.phase_soak();
  REQUIRE(r.rows.size() == 1);
  CHECK_FALSE(r.pass);
  CHECK(r.rows[0].loss_events == 1);
  CHECK(r.rows[0].packets_missing == 1);
  CHECK(r.rows[0].packets_received == 29999);
}

TEST_CASE("fault oracle reconciles every seeded run") {
  ExperimentConfig cfg;
  cfg.phase = Phase::FaultOracle;
  cfg.seed = 77;
  cfg.streams = {stream_of(0, 9000, 64, 65536)};
  cfg.params.oracle_runs = 5;
  cfg.params.oracle_packets = 50000;
  cfg.params.max_fault_prob = 1e-3;
  Harness h(cfg);
  const PhaseReport r = h.phase_fault_oracle();
  REQUIRE(r.rows.size() == 5);
  CHECK(r.pass);
  bool saw_fault = false;
  for (const auto& row : r.rows) {
    CHECK(row.pass);
    if (row.parameter("dropped") != "0") saw_fault = true;
  }
  CHECK(saw_fault);
}

TEST_CASE("fault oracle self-test proves the checker can fail") {
  ExperimentConfig cfg;
  cfg.phase = Phase::FaultOracle;
  cfg.seed = 78;
  cfg.streams = {stream_of(0, 9000, 64, 65536)};
  cfg.params.oracle_runs = 1;
  cfg.params.oracle_packets = 20000;
  cfg.params.max_fault_prob = 1e-3;
  cfg.params.oracle_self_test = true;
  Harness h(cfg);
  const PhaseReport r = h.phase_fault_oracle();
  CHECK_FALSE(r.pass);
  CHECK(r.rows[0].note.find("DIFF") != std::string::npos);
}

TEST_CASE("reports are reproducible: same seed, same loss events and bytes") {
  ExperimentConfig cfg;
  cfg.phase = Phase::Soak;
  cfg.streams = {stream_of(0, 9000, 2000, 16384000)};
  cfg.packets_per_stream = 20000;
  cfg.faults.seed = 1234;
  cfg.faults.drop_prob = 1e-4;
  cfg.faults.reorder_prob = 1e-4;

  const PhaseReport a = Harness(cfg).phase_soak();
  const PhaseReport b = Harness(cfg).phase_soak();
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.rows[0].loss_events == b.rows[0].loss_events);
  CHECK(a.rows[0].packets_missing == b.rows[0].packets_missing);
  CHECK(a.rows[0].bytes_received == b.rows[0].bytes_received);
  REQUIRE(a.final_audits.size() == b.final_audits.size());
  REQUIRE(a.final_audits[0].events.size() == b.final_audits[0].events.size());
  for (std::size_t i = 0; i < a.final_audits[0].events.size(); ++i)
    CHECK(a.final_audits[0].events[i] == b.final_audits[0].events[i]);
}

TEST_CASE("report csv, json and table carry the rows") {
  PhaseReport r;
  r.phase = "soak";
  PhaseRow row;
  row.parameters = {{"stream", "0"}};
  row.packet_rate_pps = 1000;
  row.packets_received = 42;
  r.rows.push_back(row);
  const std::string csv = r.to_csv();
  CHECK(csv.find("stream,packet_rate_pps") == 0);
  CHECK(csv.find("\n0,1000,") != std::string::npos);
  CHECK(r.to_json().find("\"packets_received\":42") != std::string::npos);
  CHECK(r.to_table().find("pkt/s") != std::string::npos);
}

TEST_CASE("csv columns plot to an svg chart") {
  const std::string csv =
      "payload,packet_rate_pps\n64,666666\n65,500000\n128,500000\n129,400000\n";
  const ChartSeries s = series_from_csv(csv, "payload", "packet_rate_pps");
  REQUIRE(s.x.size() == 4);
  CHECK(s.x[0] == 64);
  CHECK(s.y[3] == 400000);
  const std::string svg = render_svg_chart("t", "payload", "pps", {s});
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);

  const std::string skip =
      "payload,packet_rate_pps\n64,666666\nskipped,\n128,500000\n";
  CHECK(series_from_csv(skip, "payload", "packet_rate_pps").x.size() == 2);
}

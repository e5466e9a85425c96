// dropkit -- paced DROP-stream senders, a slot-ring receiver, and the
// measurement phases around them. Each subcommand runs one phase from a
// JSON config file (presets/ has ready-made ones); the effective config is
// written next to the results so a run can be repeated exactly.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dropkit/config.hpp"
#include "dropkit/harness.hpp"
#include "dropkit/svg_chart.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t duration_s = 0;
  std::uint64_t packets = 0;
  std::string transport;
  bool have_seed = false, have_duration = false, have_packets = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment config")->required();
  cmd->add_option("--out", args.out_dir, "output directory for reports and histograms");
  cmd->add_option("--seed", args.seed, "override the config seed")
      ->each([&](const std::string&) { args.have_seed = true; });
  cmd->add_option("--duration", args.duration_s, "wall-clock stop in seconds")
      ->each([&](const std::string&) { args.have_duration = true; });
  cmd->add_option("--packets", args.packets, "per-stream packet-count stop")
      ->each([&](const std::string&) { args.have_packets = true; });
  cmd->add_option("--transport", args.transport,
                  "transport override: loopback | udp | raw | sim-cost");
}

int run_phase(dropkit::Phase phase, const CommonArgs& args) {
  dropkit::ExperimentConfig cfg = dropkit::load_config_file(args.config_path);
  cfg.phase = phase;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.have_seed) cfg.seed = args.seed;
  if (args.have_duration) cfg.duration_s = args.duration_s;
  if (args.have_packets) cfg.packets_per_stream = args.packets;
  if (!args.transport.empty() &&
      !dropkit::transport_from_string(args.transport, cfg.transport)) {
    std::cerr << "unknown transport: " << args.transport << "\n";
    return 2;
  }

  dropkit::Harness harness(cfg);
  const dropkit::PhaseReport report = harness.run();
  std::cout << report.to_table();
  std::cout << (report.pass ? "PASS" : "FAIL") << ": " << dropkit::to_string(phase) << "\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UDP streaming toolkit: DROP-sequenced senders, slot-ring receiver, "
               "measurement phases"};
  app.require_subcommand(1);

  const struct {
    dropkit::Phase phase;
    const char* name;
    const char* help;
  } phases[] = {
      {dropkit::Phase::MaxRate, "max-rate", "total packet rate vs number of streams"},
      {dropkit::Phase::LosslessRate, "lossless-rate", "pause sweep to the loss onset"},
      {dropkit::Phase::SizeSweep, "size-sweep", "max lossless rate per payload size"},
      {dropkit::Phase::AssignmentSearch, "assign-search", "rank thread placement plans"},
      {dropkit::Phase::Soak, "soak", "long lossless run with histogram verification"},
      {dropkit::Phase::FaultOracle, "fault-oracle", "seeded fault runs vs ground truth"},
  };

  CommonArgs args[6];
  for (std::size_t i = 0; i < 6; ++i) add_common(app.add_subcommand(phases[i].name, phases[i].help), args[i]);

  std::string plot_csv, plot_x, plot_y = "packet_rate_pps", plot_out;
  bool plot_logx = false;
  CLI::App* plot = app.add_subcommand("plot", "render a rate-vs-parameter chart from a report CSV");
  plot->add_option("--csv", plot_csv, "report.csv produced by a phase")->required();
  plot->add_option("--x", plot_x, "parameter column for the x axis")->required();
  plot->add_option("--y", plot_y, "value column for the y axis");
  plot->add_option("--out", plot_out, "output SVG path")->required();
  plot->add_flag("--log-x", plot_logx, "logarithmic x axis");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < 6; ++i)
      if (app.get_subcommand(phases[i].name)->parsed()) return run_phase(phases[i].phase, args[i]);
    if (plot->parsed()) {
      dropkit::plot_csv_to_svg(plot_csv, plot_x, plot_y, plot_out, plot_logx);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

#include "dropkit/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dropkit {

using nlohmann::json;

const char* to_string(Phase p) {
  switch (p) {
    case Phase::MaxRate: return "max-rate";
    case Phase::LosslessRate: return "lossless-rate";
    case Phase::SizeSweep: return "size-sweep";
    case Phase::AssignmentSearch: return "assign-search";
    case Phase::Soak: return "soak";
    case Phase::FaultOracle: return "fault-oracle";
  }
  return "?";
}

bool phase_from_string(const std::string& s, Phase& out) {
  if (s == "max-rate") out = Phase::MaxRate;
  else if (s == "lossless-rate") out = Phase::LosslessRate;
  else if (s == "size-sweep") out = Phase::SizeSweep;
  else if (s == "assign-search") out = Phase::AssignmentSearch;
  else if (s == "soak") out = Phase::Soak;
  else if (s == "fault-oracle") out = Phase::FaultOracle;
  else return false;
  return true;
}

const char* to_string(TransportChoice t) {
  switch (t) {
    case TransportChoice::Loopback: return "loopback";
    case TransportChoice::Udp: return "udp";
    case TransportChoice::Raw: return "raw";
    case TransportChoice::SimCost: return "sim-cost";
  }
  return "?";
}

bool transport_from_string(const std::string& s, TransportChoice& out) {
  if (s == "loopback") out = TransportChoice::Loopback;
  else if (s == "udp") out = TransportChoice::Udp;
  else if (s == "raw") out = TransportChoice::Raw;
  else if (s == "sim-cost") out = TransportChoice::SimCost;
  else return false;
  return true;
}

namespace {

json generator_to_json(const GeneratorConfig& g) {
  json j;
  j["block_size"] = g.block_size;
  j["packet_size"] = g.packet_size;
  j["pattern"] = to_string(g.pattern);
  j["constant_byte"] = g.constant_byte;
  j["prng_seed"] = g.prng_seed;
  j["pause_ns"] = g.pause_ns;
  j["target_rate_bps"] = g.target_rate_bps;
  j["line_rate_bps"] = g.line_rate_bps;
  j["weight"] = g.weight;
  return j;
}

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.block_size = j.value("block_size", g.block_size);
  g.packet_size = j.value("packet_size", g.packet_size);
  if (j.contains("pattern")) {
    if (!pattern_from_string(j["pattern"].get<std::string>(), g.pattern))
      throw std::runtime_error("config: unknown pattern " + j["pattern"].get<std::string>());
  }
  g.constant_byte = j.value("constant_byte", g.constant_byte);
  g.prng_seed = j.value("prng_seed", g.prng_seed);
  g.pause_ns = j.value("pause_ns", g.pause_ns);
  g.target_rate_bps = j.value("target_rate_bps", g.target_rate_bps);
  g.line_rate_bps = j.value("line_rate_bps", g.line_rate_bps);
  g.weight = j.value("weight", g.weight);
  return g;
}

json stream_to_json(const StreamConfig& s) {
  json j;
  j["stream_id"] = s.stream_id;
  j["address"] = s.address;
  j["port"] = s.port;
  j["initial_packet_id"] = s.initial_packet_id;
  j["generators"] = json::array();
  for (const auto& g : s.generators) j["generators"].push_back(generator_to_json(g));
  return j;
}

StreamConfig stream_from_json(const json& j) {
  StreamConfig s;
  s.stream_id = j.value("stream_id", s.stream_id);
  s.address = j.value("address", s.address);
  s.port = j.value("port", s.port);
  s.initial_packet_id = j.value("initial_packet_id", s.initial_packet_id);
  if (j.contains("generators"))
    for (const auto& g : j["generators"]) s.generators.push_back(generator_from_json(g));
  return s;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["phase"] = to_string(cfg.phase);
  j["transport"] = to_string(cfg.transport);
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["duration_s"] = cfg.duration_s;
  j["packets_per_stream"] = cfg.packets_per_stream;
  j["slot_ring"] = {{"slot_count", cfg.slot_ring.slot_count},
                    {"slot_size", cfg.slot_ring.slot_size}};
  j["streams"] = json::array();
  for (const auto& s : cfg.streams) j["streams"].push_back(stream_to_json(s));
  if (cfg.placement) {
    j["placement"] = {{"receiver_position", cfg.placement->receiver_position},
                      {"worker_positions", cfg.placement->worker_positions}};
  }
  if (!cfg.core_map.empty()) {
    json cm = json::object();
    for (const auto& [ccx, cores] : cfg.core_map) cm[std::to_string(ccx)] = cores;
    j["core_map"] = cm;
  }
  if (!cfg.faults.is_noop() || cfg.faults.seed != 0) {
    j["faults"] = {{"drop_prob", cfg.faults.drop_prob},
                   {"dup_prob", cfg.faults.dup_prob},
                   {"reorder_prob", cfg.faults.reorder_prob},
                   {"reorder_depth", cfg.faults.reorder_depth},
                   {"seed", cfg.faults.seed},
                   {"drop_at", cfg.faults.drop_at}};
  }
  j["params"] = {{"max_streams", cfg.params.max_streams},
                 {"per_stream_rate_pps", cfg.params.per_stream_rate_pps},
                 {"histogram", cfg.params.histogram},
                 {"start_rate_pps", cfg.params.start_rate_pps},
                 {"rate_step_factor", cfg.params.rate_step_factor},
                 {"stop_ratio", cfg.params.stop_ratio},
                 {"probe_packets", cfg.params.probe_packets},
                 {"cost_base_ns", cfg.params.cost_base_ns},
                 {"cost_per_segment_ns", cfg.params.cost_per_segment_ns},
                 {"rule_w", cfg.params.rule_w},
                 {"abort_on_event", cfg.params.abort_on_event},
                 {"oracle_runs", cfg.params.oracle_runs},
                 {"oracle_packets", cfg.params.oracle_packets},
                 {"max_fault_prob", cfg.params.max_fault_prob},
                 {"oracle_self_test", cfg.params.oracle_self_test}};
  j["stats_interval_s"] = cfg.stats_interval_s;
  if (cfg.expected_first_id) j["expected_first_id"] = *cfg.expected_first_id;
  return j.dump(2);
}

ExperimentConfig parse_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig cfg;
  if (j.contains("phase") && !phase_from_string(j["phase"].get<std::string>(), cfg.phase))
    throw std::runtime_error("config: unknown phase " + j["phase"].get<std::string>());
  if (j.contains("transport") &&
      !transport_from_string(j["transport"].get<std::string>(), cfg.transport))
    throw std::runtime_error("config: unknown transport " + j["transport"].get<std::string>());
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.packets_per_stream = j.value("packets_per_stream", cfg.packets_per_stream);
  if (j.contains("slot_ring")) {
    cfg.slot_ring.slot_count = j["slot_ring"].value("slot_count", cfg.slot_ring.slot_count);
    cfg.slot_ring.slot_size = j["slot_ring"].value("slot_size", cfg.slot_ring.slot_size);
  }
  if (j.contains("streams"))
    for (const auto& s : j["streams"]) cfg.streams.push_back(stream_from_json(s));
  if (j.contains("placement")) {
    AssignmentPlan p;
    p.receiver_position = j["placement"].value("receiver_position", 0u);
    if (j["placement"].contains("worker_positions"))
      p.worker_positions =
          j["placement"]["worker_positions"].get<std::vector<std::uint32_t>>();
    cfg.placement = p;
  }
  if (j.contains("core_map")) {
    for (const auto& [key, value] : j["core_map"].items())
      cfg.core_map[static_cast<std::uint32_t>(std::stoul(key))] = value.get<std::vector<int>>();
  }
  if (j.contains("faults")) {
    const json& f = j["faults"];
    cfg.faults.drop_prob = f.value("drop_prob", 0.0);
    cfg.faults.dup_prob = f.value("dup_prob", 0.0);
    cfg.faults.reorder_prob = f.value("reorder_prob", 0.0);
    cfg.faults.reorder_depth = f.value("reorder_depth", 1u);
    cfg.faults.seed = f.value("seed", std::uint64_t{0});
    if (f.contains("drop_at")) cfg.faults.drop_at = f["drop_at"].get<std::vector<std::uint64_t>>();
  }
  if (j.contains("params")) {
    const json& p = j["params"];
    cfg.params.max_streams = p.value("max_streams", cfg.params.max_streams);
    cfg.params.per_stream_rate_pps = p.value("per_stream_rate_pps", cfg.params.per_stream_rate_pps);
    cfg.params.histogram = p.value("histogram", cfg.params.histogram);
    cfg.params.start_rate_pps = p.value("start_rate_pps", cfg.params.start_rate_pps);
    cfg.params.rate_step_factor = p.value("rate_step_factor", cfg.params.rate_step_factor);
    cfg.params.stop_ratio = p.value("stop_ratio", cfg.params.stop_ratio);
    cfg.params.probe_packets = p.value("probe_packets", cfg.params.probe_packets);
    cfg.params.cost_base_ns = p.value("cost_base_ns", cfg.params.cost_base_ns);
    cfg.params.cost_per_segment_ns = p.value("cost_per_segment_ns", cfg.params.cost_per_segment_ns);
    cfg.params.rule_w = p.value("rule_w", cfg.params.rule_w);
    cfg.params.abort_on_event = p.value("abort_on_event", cfg.params.abort_on_event);
    cfg.params.oracle_runs = p.value("oracle_runs", cfg.params.oracle_runs);
    cfg.params.oracle_packets = p.value("oracle_packets", cfg.params.oracle_packets);
    cfg.params.max_fault_prob = p.value("max_fault_prob", cfg.params.max_fault_prob);
    cfg.params.oracle_self_test = p.value("oracle_self_test", cfg.params.oracle_self_test);
  }
  cfg.stats_interval_s = j.value("stats_interval_s", cfg.stats_interval_s);
  if (j.contains("expected_first_id"))
    cfg.expected_first_id = j["expected_first_id"].get<std::uint64_t>();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path);
  out << serialize_config(cfg) << "\n";
}

}  // namespace dropkit

#include "dropkit/stats.hpp"

#include <json.hpp>

namespace dropkit {

std::string RxStatsSnapshot::to_json() const {
  nlohmann::json j;
  j["timestamp_ns"] = timestamp_ns;
  j["streams"] = nlohmann::json::array();
  for (const Stream& s : streams) {
    j["streams"].push_back({{"stream_id", s.stream_id},
                            {"packets", s.packets},
                            {"bytes", s.bytes},
                            {"decode_errors",
                             {{"truncated_header", s.truncated_header},
                              {"unsupported_version", s.unsupported_version},
                              {"flags_nonzero", s.flags_nonzero},
                              {"payload_length_mismatch", s.payload_length_mismatch}}},
                            {"misrouted", s.misrouted}});
  }
  j["queues"] = nlohmann::json::array();
  for (const Queue& q : queues) {
    j["queues"].push_back({{"queue", q.queue_index},
                           {"slots_exhausted", q.slots_exhausted},
                           {"unbound_port", q.unbound_port},
                           {"frame_errors",
                            {{"total", q.frame_errors},
                             {"ip_checksum", q.ip_checksum},
                             {"udp_checksum", q.udp_checksum},
                             {"udp_length", q.udp_length},
                             {"other", q.other_frame_error}}}});
  }
  return j.dump();
}

}  // namespace dropkit

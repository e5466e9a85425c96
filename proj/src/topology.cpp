#include "dropkit/topology.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#ifdef __linux__
#include <pthread.h>
#include <sched.h>
#endif

namespace dropkit {

std::string AssignmentPlan::describe() const {
  std::ostringstream os;
  os << "recv@" << receiver_position << " workers@{";
  for (std::size_t i = 0; i < worker_positions.size(); ++i) {
    if (i) os << ",";
    os << worker_positions[i];
  }
  os << "}";
  return os.str();
}

std::vector<PlanViolation> validate(const AssignmentPlan& plan, const CcxLayout& layout) {
  std::vector<PlanViolation> v;
  const std::uint32_t n_pos = layout.positions();
  if (plan.receiver_position >= n_pos)
    v.push_back({"position_range", "receiver position " + std::to_string(plan.receiver_position)});
  for (std::uint32_t w : plan.worker_positions)
    if (w >= n_pos) v.push_back({"position_range", "worker position " + std::to_string(w)});

  for (std::size_t i = 1; i < plan.worker_positions.size(); ++i) {
    if (plan.worker_positions[i] <= plan.worker_positions[i - 1]) {
      v.push_back({"ordering", "stream " + std::to_string(i) + " at position " +
                                   std::to_string(plan.worker_positions[i]) +
                                   " not above stream " + std::to_string(i - 1)});
    }
  }

  for (std::size_t i = 0; i < plan.worker_positions.size(); ++i) {
    const std::uint32_t w = plan.worker_positions[i];
    if (w == 0)
      v.push_back({"worker_exclusive", "worker " + std::to_string(i) +
                                           " shares position 0 with the interrupt thread"});
    if (w == plan.receiver_position)
      v.push_back({"worker_exclusive", "worker " + std::to_string(i) +
                                           " shares position " + std::to_string(w) +
                                           " with the receiving thread"});
    for (std::size_t j = i + 1; j < plan.worker_positions.size(); ++j) {
      if (plan.worker_positions[j] == w)
        v.push_back({"worker_exclusive", "workers " + std::to_string(i) + " and " +
                                             std::to_string(j) + " share position " +
                                             std::to_string(w)});
    }
  }
  return v;
}

std::vector<AssignmentPlan> enumerate_assignments(std::uint32_t n_streams, bool apply_rule_w,
                                                  const CcxLayout& layout) {
  std::vector<AssignmentPlan> plans;
  if (n_streams == 0) return plans;
  const std::uint32_t n_pos = layout.positions();

  // worker combinations: strictly ascending position tuples
  std::vector<std::uint32_t> workers(n_streams);
  const auto emit = [&](auto&& self, std::uint32_t level, std::uint32_t from) -> void {
    if (level == n_streams) {
      for (std::uint32_t r = 0; r < n_pos; ++r) {
        AssignmentPlan p{r, workers};
        if (apply_rule_w && !validate(p, layout).empty()) continue;
        plans.push_back(std::move(p));
      }
      return;
    }
    for (std::uint32_t pos = from; pos < n_pos; ++pos) {
      workers[level] = pos;
      self(self, level + 1, pos + 1);
    }
  };
  emit(emit, 0, 0);
  std::sort(plans.begin(), plans.end());
  return plans;
}

AssignmentPlan paper_two_stream_preset() { return AssignmentPlan{2, {1, 3}}; }

PinResult pin_current_thread(std::uint32_t position, std::uint32_t ccx, const CoreMap& core_map) {
  const auto it = core_map.find(ccx);
  if (it == core_map.end())
    throw std::invalid_argument("core map has no entry for ccx " + std::to_string(ccx));
  const std::vector<int>& cores = it->second;
  if (position >= cores.size())
    throw std::invalid_argument("core map for ccx " + std::to_string(ccx) + " has " +
                                std::to_string(cores.size()) + " cores, position " +
                                std::to_string(position) + " unavailable");
  const int core = cores[position];
  if (core < 0) throw std::invalid_argument("negative core id in core map");

#ifdef __linux__
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<unsigned>(core), &set);
  const int err = ::pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
  if (err != 0)
    return {false, "pthread_setaffinity_np failed with errno " + std::to_string(err), core};
  return {true, "", core};
#else
  (void)core;
  return {false, "thread affinity not supported on this platform; running unpinned", core};
#endif
}

}  // namespace dropkit

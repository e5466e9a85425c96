#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Thread placement on a core complex (CCX): a group of cores sharing an L3
// cache. Keeping one receiver instance and its workers on one CCX avoids
// cache-to-memory round trips. Positions are labelled relative to the core
// servicing the network interrupt:
//
//   position 0 -- the logical core the interrupt thread runs on
//   position 1 -- the sibling logical core of the same physical core
//   position 2/3 -- the two logical cores of the second physical core
//
// The interrupt thread is fixed at position 0 by system configuration; only
// the receiving (management) thread and the per-stream worker threads are
// assignable.

namespace dropkit {

struct CcxLayout {
  std::uint32_t active_physical_cores = 2;  // of 4 in the CCX
  std::uint32_t logical_per_physical = 2;
  std::uint32_t positions() const { return active_physical_cores * logical_per_physical; }
};

struct AssignmentPlan {
  std::uint32_t receiver_position = 0;
  // worker i serves stream i; ascending stream number gets ascending position
  std::vector<std::uint32_t> worker_positions;

  std::string describe() const;
  friend bool operator==(const AssignmentPlan&, const AssignmentPlan&) = default;
  friend auto operator<=>(const AssignmentPlan&, const AssignmentPlan&) = default;
};

// Placement rules, each checked by validate():
//  - every position within the layout,
//  - worker positions strictly ascending with stream number,
//  - Rule W: a worker position is exclusive -- not position 0 (interrupt),
//    not the receiver's position, not another worker's.
// The receiver may share position 0 with the interrupt thread; that
// combination loses no packets.
struct PlanViolation {
  std::string rule;
  std::string detail;
};

std::vector<PlanViolation> validate(const AssignmentPlan& plan, const CcxLayout& layout);

// All candidate plans for n_streams worker threads. Without Rule W the
// receiver and workers may sit anywhere (16 combinations for one stream);
// with Rule W conflicting combinations are pruned (6 remain for two
// streams). Returns an empty list when more exclusive positions are needed
// than the CCX has.
std::vector<AssignmentPlan> enumerate_assignments(std::uint32_t n_streams, bool apply_rule_w,
                                                  const CcxLayout& layout = {});

// The best placement found for two streams: receiver on position 2,
// workers on positions 1 and 3.
AssignmentPlan paper_two_stream_preset();

// Maps CCX index -> logical core ids in position order.
using CoreMap = std::map<std::uint32_t, std::vector<int>>;

struct PinResult {
  bool pinned = false;
  std::string message;  // warning or error detail when not pinned
  int core_id = -1;
};

// Restricts the calling thread to the logical core behind `position` on
// `ccx`. Returns an unpinned result with a warning on platforms without
// affinity support; an out-of-range core id is a configuration error
// (std::invalid_argument).
PinResult pin_current_thread(std::uint32_t position, std::uint32_t ccx, const CoreMap& core_map);

}  // namespace dropkit

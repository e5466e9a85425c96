#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#ifdef __linux__
#include <sched.h>
#endif

#include "dropkit/topology.hpp"

using namespace dropkit;

namespace {

// brute-force oracle: every (receiver, ascending worker tuple) combination,
// filtered by the placement rules restated independently
std::vector<AssignmentPlan> enumerate_oracle(std::uint32_t n_streams, bool rule_w) {
  std::vector<AssignmentPlan> out;
  std::vector<std::uint32_t> workers(n_streams);
  const auto rec = [&](auto&& self, std::uint32_t level, std::uint32_t from) -> void {
    if (level == n_streams) {
      for (std::uint32_t r = 0; r < 4; ++r) {
        bool ok = true;
        if (rule_w) {
          for (std::size_t i = 0; i < workers.size() && ok; ++i) {
            if (workers[i] == 0 || workers[i] == r) ok = false;
            for (std::size_t j = i + 1; j < workers.size(); ++j)
              if (workers[j] == workers[i]) ok = false;
          }
        }
        if (ok) out.push_back({r, workers});
      }
      return;
    }
    for (std::uint32_t p = from; p < 4; ++p) {
      workers[level] = p;
      self(self, level + 1, p + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

std::set<AssignmentPlan> as_set(const std::vector<AssignmentPlan>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("one stream without pruning: 16 combinations") {
  const auto plans = enumerate_assignments(1, false);
  CHECK(plans.size() == 16);
  CHECK(as_set(plans) == as_set(enumerate_oracle(1, false)));
}

TEST_CASE("two streams with the worker-exclusivity rule: exactly six combinations") {
  const auto plans = enumerate_assignments(2, true);
  REQUIRE(plans.size() == 6);

  // the six combinations, listed by hand
  const std::set<AssignmentPlan> expected = {
      {0, {1, 2}}, {0, {1, 3}}, {0, {2, 3}},
      {1, {2, 3}}, {2, {1, 3}}, {3, {1, 2}},
  };
  CHECK(as_set(plans) == expected);
  CHECK(as_set(plans) == as_set(enumerate_oracle(2, true)));
}

TEST_CASE("three streams leave one plan; four are infeasible") {
  const auto three = enumerate_assignments(3, true);
  REQUIRE(three.size() == 1);
  CHECK(three[0] == AssignmentPlan{0, {1, 2, 3}});
  CHECK(as_set(three) == as_set(enumerate_oracle(3, true)));

  CHECK(enumerate_assignments(4, true).empty());
  CHECK(enumerate_assignments(0, true).empty());
}

TEST_CASE("every plan that validates cleanly is in the pruned enumeration") {
  for (std::uint32_t n = 1; n <= 3; ++n) {
    const auto all = enumerate_assignments(n, false);
    const auto pruned = as_set(enumerate_assignments(n, true));
    for (const auto& p : all) {
      const bool clean = validate(p, CcxLayout{}).empty();
      CHECK(clean == (pruned.count(p) > 0));
    }
  }
}

TEST_CASE("validate names the violated rules") {
  const CcxLayout layout;

  CHECK(validate({0, {1}}, layout).empty());  // receiver with the interrupt thread is fine

  const auto shares_interrupt = validate({1, {0}}, layout);
  REQUIRE(!shares_interrupt.empty());
  CHECK(shares_interrupt[0].rule == "worker_exclusive");

  const auto shares_receiver = validate({2, {2}}, layout);
  REQUIRE(!shares_receiver.empty());
  CHECK(shares_receiver[0].rule == "worker_exclusive");

  const auto misordered = validate({0, {2, 1}}, layout);
  REQUIRE(!misordered.empty());
  CHECK(misordered[0].rule == "ordering");

  const auto out_of_range = validate({5, {1}}, layout);
  REQUIRE(!out_of_range.empty());
  CHECK(out_of_range[0].rule == "position_range");
}

TEST_CASE("the two-stream preset is the known-best plan") {
  const AssignmentPlan p = paper_two_stream_preset();
  CHECK(p.receiver_position == 2);
  CHECK(p.worker_positions == std::vector<std::uint32_t>{1, 3});
  CHECK(validate(p, CcxLayout{}).empty());
}

TEST_CASE("plan describes itself") {
  CHECK(AssignmentPlan{2, {1, 3}}.describe() == "recv@2 workers@{1,3}");
}

TEST_CASE("pinning errors on a broken core map") {
  CHECK_THROWS_AS(pin_current_thread(0, 7, CoreMap{}), std::invalid_argument);
  CHECK_THROWS_AS(pin_current_thread(2, 0, CoreMap{{0, {0, 1}}}), std::invalid_argument);
}

#ifdef __linux__
TEST_CASE("pinning round-trips through the os affinity mask") {
  cpu_set_t original;
  REQUIRE(sched_getaffinity(0, sizeof(original), &original) == 0);
  int core = -1;
  for (int c = 0; c < CPU_SETSIZE; ++c)
    if (CPU_ISSET(c, &original)) {
      core = c;
      break;
    }
  REQUIRE(core >= 0);

  // position 1 maps to the usable core; the -1 at position 0 is never read
  const PinResult r = pin_current_thread(1, 0, CoreMap{{0, {-1, core}}});
  if (r.pinned) {
    cpu_set_t now;
    REQUIRE(sched_getaffinity(0, sizeof(now), &now) == 0);
    CHECK(CPU_COUNT(&now) == 1);
    CHECK(CPU_ISSET(core, &now));
  } else {
    WARN_MESSAGE(false, r.message);
  }
  sched_setaffinity(0, sizeof(original), &original);
}
#endif

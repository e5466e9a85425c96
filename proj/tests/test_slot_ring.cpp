#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <thread>
#include <vector>

#include "dropkit/slot_ring.hpp"
#include "dropkit/transport.hpp"

using namespace dropkit;

TEST_CASE("spsc ring basic fifo and capacity") {
  SpscRing ring(8);
  CHECK(ring.empty());
  std::uint32_t v;
  CHECK_FALSE(ring.try_pop(v));
  for (std::uint32_t i = 0; i < 8; ++i) CHECK(ring.try_push(i));
  CHECK_FALSE(ring.try_push(99));
  CHECK(ring.size() == 8);
  for (std::uint32_t i = 0; i < 8; ++i) {
    REQUIRE(ring.try_pop(v));
    CHECK(v == i);
  }
  CHECK(ring.empty());
}

TEST_CASE("spsc ring carries 1e6 items across threads intact") {
  SpscRing ring(1024);
  constexpr std::uint32_t kItems = 1000000;
  std::uint64_t sum = 0;
  std::thread consumer([&] {
    std::uint32_t v;
    for (std::uint32_t i = 0; i < kItems; ++i) {
      int spin = 0;
      while (!ring.try_pop(v)) SpscRing::backoff(spin++);
      sum += v;
    }
  });
  for (std::uint32_t i = 0; i < kItems; ++i) ring.push(i % 4096);
  consumer.join();
  std::uint64_t expected = 0;
  for (std::uint32_t i = 0; i < kItems; ++i) expected += i % 4096;
  CHECK(sum == expected);
}

TEST_CASE("slot pool hands out distinct pre-allocated buffers") {
  SlotPool pool(16, 2048);
  CHECK(pool.slot_count() == 16);
  CHECK(pool.slot_size() == 2048);
  pool.data(0)[0] = 0xAA;
  pool.data(1)[0] = 0xBB;
  CHECK(pool.data(0)[0] == 0xAA);
  CHECK(pool.data(0) + 2048 == pool.data(1));
  pool.meta(3).frame_len = 77;
  CHECK(pool.meta(3).frame_len == 77);
}

TEST_CASE("loopback endpoint without blocking drops the newest and counts it") {
  LoopbackEndpoint ep(4, 256, 9000, false, /*block_on_full=*/false);
  LoopbackTransport t(std::make_shared<LoopbackEndpoint>(4, 256, 9000, false, false));
  // use the transport's own endpoint
  LoopbackEndpoint& e = t.endpoint();
  std::uint8_t pkt[64] = {1};
  for (int i = 0; i < 4; ++i) CHECK(t.send(pkt, sizeof(pkt), 0));
  CHECK(e.slots_exhausted.load() == 0);
  CHECK(t.send(pkt, sizeof(pkt), 0));  // fifth: no free slot
  CHECK(e.slots_exhausted.load() == 1);
  CHECK(e.intake_ring.size() == 4);
}

TEST_CASE("loopback receive timestamps are monotone per queue") {
  LoopbackTransport t(std::make_shared<LoopbackEndpoint>(64, 256, 9000, false, true));
  std::uint8_t pkt[8] = {};
  std::uint64_t prev = 0;
  for (int i = 0; i < 32; ++i) {
    REQUIRE(t.send(pkt, sizeof(pkt), 0));
    std::uint32_t slot;
    REQUIRE(t.endpoint().intake_ring.try_pop(slot));
    const std::uint64_t ts = t.endpoint().pool.meta(slot).timestamp_ns;
    CHECK(ts >= prev);
    prev = ts;
    t.endpoint().free_ring.push(slot);
  }
}

TEST_CASE("oversized packets are a transport failure, not a crash") {
  LoopbackTransport t(std::make_shared<LoopbackEndpoint>(4, 128, 9000, false, true));
  std::vector<std::uint8_t> big(256, 0);
  CHECK_FALSE(t.send(big.data(), big.size(), 0));
}

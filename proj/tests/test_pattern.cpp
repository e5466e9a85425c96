#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dropkit/pattern.hpp"

using namespace dropkit;

namespace {

// reference pattern stream: the bytes a counting generator must emit,
// computed independently of the chunking logic
std::vector<std::uint8_t> counting_reference(std::size_t bytes) {
  std::vector<std::uint8_t> out(bytes);
  std::uint16_t w = 0;
  for (std::size_t i = 0; i + 1 < bytes; i += 2) {
    out[i] = static_cast<std::uint8_t>(w);
    out[i + 1] = static_cast<std::uint8_t>(w >> 8);
    ++w;
  }
  if (bytes % 2) out[bytes - 1] = static_cast<std::uint8_t>(w);
  return out;
}

std::vector<std::uint8_t> drain(PatternGenerator& gen, std::size_t bytes) {
  std::vector<std::uint8_t> out;
  while (out.size() < bytes) {
    const PayloadChunk c = gen.next_payload();
    out.insert(out.end(), c.data, c.data + c.len);
  }
  out.resize(bytes);
  return out;
}

}  // namespace

TEST_CASE("split_block produces full packets plus the remainder") {
  CHECK(split_block(5000, 2000) == std::vector<std::uint32_t>{2000, 2000, 1000});
  CHECK(split_block(16384, 2000) ==
        std::vector<std::uint32_t>{2000, 2000, 2000, 2000, 2000, 2000, 2000, 2000, 384});
  CHECK(split_block(2000, 2000) == std::vector<std::uint32_t>{2000});
  CHECK_THROWS(split_block(0, 2000));
  CHECK_THROWS(split_block(2000, 0));
}

TEST_CASE("split_block lengths always sum to the block size") {
  for (std::uint64_t block : {1ull, 63ull, 64ull, 65ull, 16384ull, 999999ull}) {
    for (std::uint32_t pkt : {1u, 7u, 64u, 2000u, 2048u}) {
      const auto lens = split_block(block, pkt);
      CHECK(lens.size() == (block + pkt - 1) / pkt);
      CHECK(std::accumulate(lens.begin(), lens.end(), std::uint64_t{0}) == block);
      for (std::size_t i = 0; i + 1 < lens.size(); ++i) CHECK(lens[i] == pkt);
    }
  }
}

TEST_CASE("counting pattern starts at word 0") {
  GeneratorConfig cfg;
  cfg.block_size = 8;
  cfg.packet_size = 8;
  PatternGenerator gen(cfg);
  const PayloadChunk c = gen.next_payload();
  REQUIRE(c.len == 8);
  const std::array<std::uint8_t, 8> expected = {0, 0, 1, 0, 2, 0, 3, 0};
  CHECK(std::equal(expected.begin(), expected.end(), c.data));
  CHECK(c.is_last_of_block);
}

TEST_CASE("counting pattern wraps 0xffff -> 0x0000 and continues across chunks") {
  GeneratorConfig cfg;
  cfg.block_size = 2 * 65536 + 8;  // crosses the wrap inside the stream
  cfg.packet_size = 1000;          // chunks do not align with the wrap
  PatternGenerator gen(cfg);
  const auto bytes = drain(gen, cfg.block_size);
  CHECK(bytes == counting_reference(cfg.block_size));
  // the wrap itself: ...fe ff, ff ff, 00 00...
  const std::size_t wrap = 65535 * 2;
  CHECK(bytes[wrap] == 0xff);
  CHECK(bytes[wrap + 1] == 0xff);
  CHECK(bytes[wrap + 2] == 0x00);
  CHECK(bytes[wrap + 3] == 0x00);
}

TEST_CASE("pattern continues across block boundaries, odd packet sizes included") {
  GeneratorConfig cfg;
  cfg.block_size = 999;  // odd block: a word straddles the boundary
  cfg.packet_size = 97;
  PatternGenerator gen(cfg);
  const auto bytes = drain(gen, 5 * cfg.block_size);
  CHECK(bytes == counting_reference(5 * cfg.block_size));
}

TEST_CASE("equal-frequency: every word appears equally often per 131072 bytes") {
  GeneratorConfig cfg;
  cfg.block_size = 131072;  // one full 16-bit counter cycle
  cfg.packet_size = 2000;
  PatternGenerator gen(cfg);
  const auto bytes = drain(gen, cfg.block_size);

  // brute-force count of every 16-bit word
  std::vector<std::uint32_t> counts(65536, 0);
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2)
    counts[bytes[i] | (bytes[i + 1] << 8)]++;
  for (std::uint32_t c : counts) CHECK(c == 1);
}

TEST_CASE("constant and prng patterns fill deterministically") {
  GeneratorConfig cfg;
  cfg.block_size = 4096;
  cfg.packet_size = 512;
  cfg.pattern = PatternKind::ConstantByte;
  cfg.constant_byte = 0xAB;
  PatternGenerator con(cfg);
  for (std::uint8_t b : drain(con, 4096)) CHECK(b == 0xAB);

  cfg.pattern = PatternKind::Prng;
  cfg.prng_seed = 7;
  PatternGenerator a(cfg), b(cfg);
  const auto stream_a = drain(a, 4096);
  CHECK(stream_a == drain(b, 4096));
  cfg.prng_seed = 8;
  PatternGenerator c(cfg);
  CHECK(stream_a != drain(c, 4096));
}

TEST_CASE("pause_for_rate at the generator line rate needs no pause") {
  CHECK(pause_for_rate(2000, 10.24e9, 10.24e9) == 0);
}

TEST_CASE("pause plus wire time gives the inter-packet period") {
  // 350-byte payload at 3.4 Mp/s: period 1/3.4e6 s, about 294 ns
  const double rate_bps = 3.4e6 * 350 * 8;
  const std::uint64_t pause = pause_for_rate(350, rate_bps, 10.24e9);
  const double wire_ns = 350 * 8 / 10.24e9 * 1e9;
  const double period = static_cast<double>(pause) + wire_ns;
  CHECK(period == doctest::Approx(1e9 / 3.4e6).epsilon(0.01));
}

TEST_CASE("unbounded target rate needs no pause") {
  CHECK(pause_for_rate(2000, 1e18, 10.24e9) == 0);
  CHECK_THROWS(pause_for_rate(2000, 0, 10.24e9));
}

TEST_CASE("generator converts target rate to the packet period") {
  GeneratorConfig cfg;
  cfg.packet_size = 1000;
  cfg.target_rate_bps = 1000 * 8 * 1e5;  // 100k packets/s
  PatternGenerator gen(cfg);
  CHECK(gen.packet_period_ns() == doctest::Approx(10000).epsilon(0.001));
}

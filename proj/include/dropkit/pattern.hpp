#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Software replica of an FPGA data generator: emits blocks of patterned
// payload, split into packets of at most packet_size bytes, optionally
// paced by a per-packet pause.

namespace dropkit {

enum class PatternKind : std::uint8_t {
  Counting16,    // consecutive little-endian 16-bit words, wraps at 0xFFFF
  ConstantByte,  // every byte equals `constant_byte`
  Prng,          // deterministic pseudo-random bytes from `prng_seed`
};

const char* to_string(PatternKind k);
bool pattern_from_string(const std::string& s, PatternKind& out);

struct GeneratorConfig {
  std::uint64_t block_size = 16384;  // bytes generated per block
  std::uint32_t packet_size = 2000;  // max payload bytes per packet
  PatternKind pattern = PatternKind::Counting16;
  std::uint8_t constant_byte = 0;
  std::uint64_t prng_seed = 0;
  std::uint64_t pause_ns = 0;            // inserted after each packet
  double target_rate_bps = 0;            // alternative to pause_ns; 0 = unset
  double line_rate_bps = 10.24e9;        // used to derive wire time
  std::uint32_t weight = 1;              // packets per round-robin turn

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

// Lengths of the packets a block is split into: ceil(block/packet) chunks,
// all equal to packet_size except a final remainder. Lengths sum to
// block_size.
std::vector<std::uint32_t> split_block(std::uint64_t block_size, std::uint32_t packet_size);

// Pause appended after a packet so that the long-run rate meets
// target_rate: max(0, bits/target - bits/line_rate) in integer
// nanoseconds. Pacing granularity is one packet; sub-word pacing is not
// observable in software.
std::uint64_t pause_for_rate(std::uint32_t packet_size, double target_rate_bps,
                             double line_rate_bps);

struct PayloadChunk {
  const std::uint8_t* data = nullptr;
  std::uint32_t len = 0;
  bool is_last_of_block = false;
};

// One generator instance. Single-threaded; the pattern continues across
// packet and block boundaries (Counting16 starts at word value 0).
class PatternGenerator {
 public:
  explicit PatternGenerator(const GeneratorConfig& cfg);

  // Fills the next packet's payload into an internal buffer and returns a
  // view of it. The view stays valid until the next call.
  PayloadChunk next_payload();

  // Nanoseconds between consecutive packet starts at the configured rate
  // (wire time plus pause), for a full-size packet.
  std::uint64_t packet_period_ns() const { return period_ns_; }
  std::uint64_t pause_ns() const { return pause_ns_; }

  const GeneratorConfig& config() const { return cfg_; }

 private:
  void fill(std::uint8_t* dst, std::uint32_t len);

  GeneratorConfig cfg_;
  std::vector<std::uint8_t> buf_;
  std::uint64_t block_remaining_ = 0;
  std::uint16_t counter_ = 0;     // Counting16 state
  bool carry_low_byte_ = false;   // odd split: low byte emitted, high pending
  std::uint64_t prng_state_ = 0;
  std::uint32_t prng_avail_ = 0;  // unread bytes of prng_word_
  std::uint64_t prng_word_ = 0;
  std::uint64_t pause_ns_ = 0;
  std::uint64_t period_ns_ = 0;
};

}  // namespace dropkit

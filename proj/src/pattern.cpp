#include "dropkit/pattern.hpp"

#include <cmath>
#include <stdexcept>

namespace dropkit {

const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Counting16: return "counting16";
    case PatternKind::ConstantByte: return "constant";
    case PatternKind::Prng: return "prng";
  }
  return "?";
}

bool pattern_from_string(const std::string& s, PatternKind& out) {
  if (s == "counting16") out = PatternKind::Counting16;
  else if (s == "constant") out = PatternKind::ConstantByte;
  else if (s == "prng") out = PatternKind::Prng;
  else return false;
  return true;
}

std::vector<std::uint32_t> split_block(std::uint64_t block_size, std::uint32_t packet_size) {
  if (block_size == 0 || packet_size == 0)
    throw std::invalid_argument("split_block: block_size and packet_size must be > 0");
  std::vector<std::uint32_t> lengths;
  lengths.reserve(static_cast<std::size_t>((block_size + packet_size - 1) / packet_size));
  std::uint64_t remaining = block_size;
  while (remaining > 0) {
    const std::uint32_t n =
        remaining >= packet_size ? packet_size : static_cast<std::uint32_t>(remaining);
    lengths.push_back(n);
    remaining -= n;
  }
  return lengths;
}

std::uint64_t pause_for_rate(std::uint32_t packet_size, double target_rate_bps,
                             double line_rate_bps) {
  if (target_rate_bps <= 0) throw std::invalid_argument("pause_for_rate: target_rate must be > 0");
  const double bits = 8.0 * packet_size;
  const double period_ns = bits / target_rate_bps * 1e9;
  const double wire_ns = line_rate_bps > 0 ? bits / line_rate_bps * 1e9 : 0.0;
  const double pause = period_ns - wire_ns;
  if (pause <= 0 || !std::isfinite(pause)) return 0;
  return static_cast<std::uint64_t>(std::llround(pause));
}

namespace {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

PatternGenerator::PatternGenerator(const GeneratorConfig& cfg) : cfg_(cfg) {
  if (cfg.block_size == 0) throw std::invalid_argument("generator: block_size must be > 0");
  if (cfg.packet_size == 0) throw std::invalid_argument("generator: packet_size must be > 0");
  buf_.resize(cfg.packet_size);
  prng_state_ = cfg.prng_seed;
  pause_ns_ = cfg.pause_ns;
  if (cfg.target_rate_bps > 0)
    pause_ns_ = pause_for_rate(cfg.packet_size, cfg.target_rate_bps, cfg.line_rate_bps);
  const double wire_ns =
      cfg.line_rate_bps > 0 ? 8.0 * cfg.packet_size / cfg.line_rate_bps * 1e9 : 0.0;
  period_ns_ = pause_ns_ + static_cast<std::uint64_t>(std::llround(wire_ns));
}

PayloadChunk PatternGenerator::next_payload() {
  if (block_remaining_ == 0) block_remaining_ = cfg_.block_size;
  const std::uint32_t len = block_remaining_ >= cfg_.packet_size
                                ? cfg_.packet_size
                                : static_cast<std::uint32_t>(block_remaining_);
  fill(buf_.data(), len);
  block_remaining_ -= len;
  return {buf_.data(), len, block_remaining_ == 0};
}

void PatternGenerator::fill(std::uint8_t* dst, std::uint32_t len) {
  switch (cfg_.pattern) {
    case PatternKind::ConstantByte: {
      std::fill(dst, dst + len, cfg_.constant_byte);
      break;
    }
    case PatternKind::Prng: {
      std::uint32_t i = 0;
      while (i < len) {
        if (prng_avail_ == 0) {
          prng_word_ = splitmix64(prng_state_);
          prng_avail_ = 8;
        }
        dst[i++] = static_cast<std::uint8_t>(prng_word_);
        prng_word_ >>= 8;
        --prng_avail_;
      }
      break;
    }
    case PatternKind::Counting16: {
      std::uint32_t i = 0;
      if (carry_low_byte_ && i < len) {
        // finish the word whose low byte went out in the previous packet
        dst[i++] = static_cast<std::uint8_t>(counter_ >> 8);
        ++counter_;
        carry_low_byte_ = false;
      }
      while (i + 1 < len) {
        dst[i] = static_cast<std::uint8_t>(counter_);
        dst[i + 1] = static_cast<std::uint8_t>(counter_ >> 8);
        ++counter_;
        i += 2;
      }
      if (i < len) {
        dst[i] = static_cast<std::uint8_t>(counter_);
        carry_low_byte_ = true;
      }
      break;
    }
  }
}

}  // namespace dropkit

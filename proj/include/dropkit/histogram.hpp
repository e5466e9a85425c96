#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

// Completeness check for counting-pattern payloads: the occurrence of each
// 16-bit word is counted in a 256x256 table indexed by the word's upper and
// lower byte. For a lossless transfer the difference between the highest
// and lowest counter is at most one, and the higher-valued bins form a
// single contiguous (wrap-around) word range -- the histogram plots as at
// most two homogeneous areas.

namespace dropkit {

class WordHistogram {
 public:
  static constexpr std::size_t kBins = 65536;

  WordHistogram() : bins_(kBins, 0) {}

  // Counts each consecutive little-endian 16-bit word of the payload. An
  // odd trailing byte is tallied as an error, not as a word. Word order is
  // configurable for interop with big-endian generators.
  void accumulate(const std::uint8_t* payload, std::size_t len);

  void merge(const WordHistogram& other);

  std::uint64_t bin(std::uint16_t word) const { return bins_[word]; }
  std::uint64_t bin(std::uint8_t upper, std::uint8_t lower) const {
    return bins_[static_cast<std::size_t>(upper) << 8 | lower];
  }
  std::uint64_t total_words() const { return total_words_; }
  std::uint64_t odd_tail_errors() const { return odd_tail_errors_; }
  const std::vector<std::uint64_t>& bins() const { return bins_; }

  void set_big_endian_words(bool v) { big_endian_words_ = v; }

 private:
  std::vector<std::uint64_t> bins_;
  std::uint64_t total_words_ = 0;
  std::uint64_t odd_tail_errors_ = 0;
  bool big_endian_words_ = false;
};

struct UniformityCheck {
  std::uint64_t max = 0;
  std::uint64_t min = 0;
  std::uint64_t spread = 0;
  std::uint32_t areas = 0;           // contiguous runs of max-valued bins
  std::uint32_t max_range_start = 0; // first word of the max-valued run (if single)
  std::uint32_t max_range_len = 0;
  bool pass = false;

  std::string describe() const;
};

// Lossless criterion: spread <= 1 and the max-valued bins form one
// contiguous wrap-around word range (two homogeneous areas at most; one
// when the transfer stopped exactly on a full counter cycle).
UniformityCheck check_uniform(const WordHistogram& hist);

// Every transferred word holds two bytes, so the counter sum must equal
// half the number of payload bytes.
bool check_sum(const WordHistogram& hist, std::uint64_t bytes_received);

// Writes the 256x256 counter table as a binary PGM image (counters mapped
// min..max onto 0..255, row = upper byte) and as a CSV of raw counters.
// Throws std::runtime_error on I/O failure.
void render_histogram(const WordHistogram& hist, const std::string& pgm_path,
                      const std::string& csv_path);

}  // namespace dropkit

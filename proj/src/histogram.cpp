#include "dropkit/histogram.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dropkit {

void WordHistogram::accumulate(const std::uint8_t* payload, std::size_t len) {
  std::size_t i = 0;
  if (!big_endian_words_) {
    for (; i + 1 < len; i += 2) {
      const std::uint16_t w = static_cast<std::uint16_t>(payload[i] | (payload[i + 1] << 8));
      ++bins_[w];
    }
  } else {
    for (; i + 1 < len; i += 2) {
      const std::uint16_t w = static_cast<std::uint16_t>((payload[i] << 8) | payload[i + 1]);
      ++bins_[w];
    }
  }
  total_words_ += len / 2;
  if (len % 2) ++odd_tail_errors_;
}

void WordHistogram::merge(const WordHistogram& other) {
  for (std::size_t i = 0; i < kBins; ++i) bins_[i] += other.bins_[i];
  total_words_ += other.total_words_;
  odd_tail_errors_ += other.odd_tail_errors_;
}

std::string UniformityCheck::describe() const {
  std::ostringstream os;
  os << (pass ? "pass" : "fail") << " (min=" << min << ", max=" << max << ", spread=" << spread
     << ", areas=" << areas << ")";
  return os.str();
}

UniformityCheck check_uniform(const WordHistogram& hist) {
  UniformityCheck c;
  const auto& bins = hist.bins();
  c.min = bins[0];
  c.max = bins[0];
  for (std::uint64_t v : bins) {
    c.min = std::min(c.min, v);
    c.max = std::max(c.max, v);
  }
  c.spread = c.max - c.min;
  if (c.spread == 0) {
    c.areas = 1;
    c.max_range_start = 0;
    c.max_range_len = WordHistogram::kBins;
    c.pass = true;
    return c;
  }
  // count circular runs of max-valued bins and remember where one starts
  std::uint32_t runs = 0;
  std::uint32_t run_len = 0;
  std::uint32_t run_start = 0;
  for (std::uint32_t w = 0; w < WordHistogram::kBins; ++w) {
    const bool is_max = bins[w] == c.max;
    const bool prev_max = bins[(w + WordHistogram::kBins - 1) % WordHistogram::kBins] == c.max;
    if (is_max && !prev_max) {
      ++runs;
      run_start = w;
    }
    if (is_max) ++run_len;
  }
  c.areas = runs;
  if (runs == 1) {
    // if the run wraps past 0xffff, run_start found the true start
    c.max_range_start = run_start;
    c.max_range_len = run_len;
  }
  c.pass = c.spread == 1 && runs == 1;
  return c;
}

bool check_sum(const WordHistogram& hist, std::uint64_t bytes_received) {
  return hist.total_words() * 2 == bytes_received;
}

void render_histogram(const WordHistogram& hist, const std::string& pgm_path,
                      const std::string& csv_path) {
  const auto& bins = hist.bins();
  std::uint64_t lo = bins[0], hi = bins[0];
  for (std::uint64_t v : bins) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot open " + pgm_path);
  pgm << "P5\n256 256\n255\n";
  std::vector<std::uint8_t> row(256);
  for (std::uint32_t upper = 0; upper < 256; ++upper) {
    for (std::uint32_t lower = 0; lower < 256; ++lower) {
      const std::uint64_t v = bins[(upper << 8) | lower];
      row[lower] = hi == lo ? 255
                            : static_cast<std::uint8_t>((v - lo) * 255 / (hi - lo));
    }
    pgm.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!pgm) throw std::runtime_error("write failed: " + pgm_path);

  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  for (std::uint32_t upper = 0; upper < 256; ++upper) {
    for (std::uint32_t lower = 0; lower < 256; ++lower) {
      if (lower) csv << ",";
      csv << bins[(upper << 8) | lower];
    }
    csv << "\n";
  }
  if (!csv) throw std::runtime_error("write failed: " + csv_path);
}

}  // namespace dropkit

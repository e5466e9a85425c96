#pragma once

#include <atomic>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

// Pre-allocated packet slots and the single-producer single-consumer index
// rings that move their ownership between intake, worker, and free pool. A
// slot is owned by exactly one party at any instant; the rings are the only
// cross-thread handoff.

namespace dropkit {

inline constexpr std::uint32_t kInvalidSlot = 0xffffffffu;

// Bounded SPSC ring of slot indices. Capacity must be a power of two.
// try_push/try_pop never block; the blocking helpers spin briefly, then
// yield, then sleep, which keeps single-core hosts responsive.
class SpscRing {
 public:
  explicit SpscRing(std::uint32_t capacity) : mask_(capacity - 1), buf_(capacity) {
    assert(capacity != 0 && (capacity & (capacity - 1)) == 0);
  }

  bool try_push(std::uint32_t v) {
    const std::uint64_t head = head_.load(std::memory_order_relaxed);
    if (head - tail_.load(std::memory_order_acquire) > mask_) return false;
    buf_[head & mask_] = v;
    head_.store(head + 1, std::memory_order_release);
    return true;
  }

  bool try_pop(std::uint32_t& v) {
    const std::uint64_t tail = tail_.load(std::memory_order_relaxed);
    if (tail == head_.load(std::memory_order_acquire)) return false;
    v = buf_[tail & mask_];
    tail_.store(tail + 1, std::memory_order_release);
    return true;
  }

  void push(std::uint32_t v) {
    for (int spin = 0; !try_push(v); ++spin) backoff(spin);
  }

  std::uint32_t size() const {
    return static_cast<std::uint32_t>(head_.load(std::memory_order_acquire) -
                                      tail_.load(std::memory_order_acquire));
  }
  bool empty() const { return size() == 0; }
  std::uint32_t capacity() const { return mask_ + 1; }

  static void backoff(int spin) {
    if (spin < 64) return;
    if (spin < 1024) {
      std::this_thread::yield();
      return;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(50));
  }

 private:
  alignas(64) std::atomic<std::uint64_t> head_{0};
  alignas(64) std::atomic<std::uint64_t> tail_{0};
  std::uint32_t mask_;
  std::vector<std::uint32_t> buf_;
};

// Receive metadata attached to a slot while it travels through the path.
struct SlotMeta {
  std::uint32_t frame_len = 0;       // bytes stored in the slot
  std::uint32_t queue_index = 0;     // receive queue that delivered it
  std::uint64_t timestamp_ns = 0;    // monotonic receive time
  std::uint32_t payload_offset = 0;  // user payload bounds (set after decode)
  std::uint32_t payload_len = 0;
  std::uint64_t packet_id = 0;
};

// The pre-allocated buffer area. slot_count must be a power of two and
// slot_size at most kMaxSlotSize; everything is allocated before reception
// starts.
class SlotPool {
 public:
  SlotPool(std::uint32_t slot_count, std::uint32_t slot_size)
      : slot_size_(slot_size), meta_(slot_count), buf_(std::size_t{slot_count} * slot_size) {
    assert(slot_count != 0 && (slot_count & (slot_count - 1)) == 0);
  }

  std::uint8_t* data(std::uint32_t slot) { return buf_.data() + std::size_t{slot} * slot_size_; }
  const std::uint8_t* data(std::uint32_t slot) const {
    return buf_.data() + std::size_t{slot} * slot_size_;
  }
  SlotMeta& meta(std::uint32_t slot) { return meta_[slot]; }
  std::uint32_t slot_size() const { return slot_size_; }
  std::uint32_t slot_count() const { return static_cast<std::uint32_t>(meta_.size()); }

 private:
  std::uint32_t slot_size_;
  std::vector<SlotMeta> meta_;
  std::vector<std::uint8_t> buf_;
};

}  // namespace dropkit

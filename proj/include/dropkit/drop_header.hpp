#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>

// DROP (Data ReadOut Protocol) wire header.
//
// Every UDP payload starts with a fixed 16-byte header in network byte
// order:
//
//   offset 0   version     u8   (currently 1)
//   offset 1   flags       u8   (must be 0 in v1)
//   offset 2   stream_id   u16  (one logical stream, 1:1 with a UDP port)
//   offset 4   payload_len u16  (user bytes following the header)
//   offset 6   reserved    u16  (written as 0, ignored on decode)
//   offset 8   packet_id   u64  (per-stream counter, +1 per packet)
//
// The protocol carries no acknowledgements and no retransmission; the
// packet_id counter is the only sequencing mechanism. See FORMAT.md for a
// hex-dump example.

namespace dropkit {

inline constexpr std::size_t kDropHeaderSize = 16;
inline constexpr std::uint8_t kDropVersion = 1;

// Largest frame a receive slot may hold.
inline constexpr std::size_t kMaxSlotSize = 2048;

// Ethernet(14) + IPv4(20) + UDP(8) overhead in raw-frame mode.
inline constexpr std::size_t kRawFrameOverhead = 14 + 20 + 8;

struct DropHeader {
  std::uint8_t version = kDropVersion;
  std::uint8_t flags = 0;
  std::uint16_t stream_id = 0;
  std::uint16_t payload_len = 0;
  std::uint64_t packet_id = 0;

  friend bool operator==(const DropHeader&, const DropHeader&) = default;
};

// User payload capacity of one slot. In raw-frame mode the slot holds the
// full Ethernet/IPv4/UDP frame, in datagram mode just the UDP payload.
inline constexpr std::size_t max_payload_for_slot(std::size_t slot_size, bool raw_frame) {
  const std::size_t overhead = kDropHeaderSize + (raw_frame ? kRawFrameOverhead : 0);
  return slot_size > overhead ? slot_size - overhead : 0;
}

enum class HeaderDecodeError : std::uint8_t {
  None = 0,
  TruncatedHeader,
  UnsupportedVersion,
  FlagsNonzero,
  PayloadLengthMismatch,
};

inline const char* to_string(HeaderDecodeError e) {
  switch (e) {
    case HeaderDecodeError::None: return "none";
    case HeaderDecodeError::TruncatedHeader: return "truncated_header";
    case HeaderDecodeError::UnsupportedVersion: return "unsupported_version";
    case HeaderDecodeError::FlagsNonzero: return "flags_nonzero";
    case HeaderDecodeError::PayloadLengthMismatch: return "payload_length_mismatch";
  }
  return "?";
}

struct HeaderDecodeResult {
  DropHeader header;
  HeaderDecodeError error = HeaderDecodeError::None;
  bool ok() const { return error == HeaderDecodeError::None; }
};

struct HeaderEncodeResult {
  std::size_t size = 0;
  const char* violated_field = nullptr;  // nullptr on success
  bool ok() const { return violated_field == nullptr; }
};

namespace detail {
inline void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 8);
  p[1] = static_cast<std::uint8_t>(v);
}
inline void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
inline std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}
}  // namespace detail

// Writes the 16-byte header. Returns the byte count (16) on success; on an
// invariant violation names the offending field and writes nothing.
inline HeaderEncodeResult encode_header(const DropHeader& h, std::uint8_t* out,
                                        std::size_t out_capacity) {
  if (out_capacity < kDropHeaderSize) return {0, "buffer"};
  if (h.version != kDropVersion) return {0, "version"};
  if (h.flags != 0) return {0, "flags"};
  out[0] = h.version;
  out[1] = h.flags;
  detail::put_u16(out + 2, h.stream_id);
  detail::put_u16(out + 4, h.payload_len);
  detail::put_u16(out + 6, 0);
  detail::put_u64(out + 8, h.packet_id);
  return {kDropHeaderSize, nullptr};
}

// Parses a header from the start of `buf` (a full datagram: header plus
// payload). Rejects short buffers, unknown versions, nonzero flags, and a
// payload_len that exceeds the bytes actually present.
inline HeaderDecodeResult decode_header(const std::uint8_t* buf, std::size_t len) {
  HeaderDecodeResult r;
  if (len < kDropHeaderSize) {
    r.error = HeaderDecodeError::TruncatedHeader;
    return r;
  }
  r.header.version = buf[0];
  r.header.flags = buf[1];
  r.header.stream_id = detail::get_u16(buf + 2);
  r.header.payload_len = detail::get_u16(buf + 4);
  r.header.packet_id = detail::get_u64(buf + 8);
  if (r.header.version != kDropVersion) {
    r.error = HeaderDecodeError::UnsupportedVersion;
  } else if (r.header.flags != 0) {
    r.error = HeaderDecodeError::FlagsNonzero;
  } else if (r.header.payload_len > len - kDropHeaderSize) {
    r.error = HeaderDecodeError::PayloadLengthMismatch;
  }
  return r;
}

// Signed distance next - prev in 64-bit modular arithmetic. A healthy
// stream yields 1 for consecutive packets; wraparound-safe even though
// 64-bit counters never wrap in practice.
inline std::int64_t id_distance(std::uint64_t prev, std::uint64_t next) {
  return static_cast<std::int64_t>(next - prev);
}

}  // namespace dropkit

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

// Building and parsing of full Ethernet/IPv4/UDP frames. In raw-frame mode
// the kernel network stack is bypassed, so protocol decoding and error
// checking are done here: ethertype, IPv4 header checksum, UDP length
// consistency and UDP checksum. A packet failing any check never reaches a
// stream processor.

namespace dropkit {

inline constexpr std::size_t kEthHeaderSize = 14;
inline constexpr std::size_t kIpv4HeaderSize = 20;  // no options emitted
inline constexpr std::size_t kUdpHeaderSize = 8;

enum class FrameError : std::uint8_t {
  None = 0,
  TooShort,
  NotIpv4,       // wrong ethertype or IP version
  BadIpHeader,   // IHL out of range / truncated / bad total length
  Fragmented,    // fragments are not reassembled
  IpChecksum,
  NotUdp,
  UdpLength,
  UdpChecksum,
};

const char* to_string(FrameError e);

struct MacAddr {
  std::array<std::uint8_t, 6> bytes{};
  friend bool operator==(const MacAddr&, const MacAddr&) = default;
};

struct FrameSpec {
  MacAddr dst_mac;
  MacAddr src_mac;
  std::uint32_t src_ip = 0;  // host byte order
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t ttl = 64;
  std::uint16_t ip_id = 0;
};

struct ParsedFrame {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t payload_offset = 0;  // UDP payload bounds within the frame
  std::uint32_t payload_len = 0;
  FrameError error = FrameError::None;
  bool ok() const { return error == FrameError::None; }
};

// RFC 1071 ones'-complement checksum of `len` bytes folded to 16 bits
// (not yet complemented). `initial` seeds the sum for pseudo-header use.
std::uint32_t checksum_accumulate(const std::uint8_t* data, std::size_t len,
                                  std::uint32_t initial = 0);
std::uint16_t checksum_finish(std::uint32_t sum);

// Writes Ethernet + IPv4 + UDP headers followed by `payload` into `out`
// and returns the frame length. IPv4 header checksum and UDP checksum
// (pseudo-header included) are filled in. Returns 0 if the frame would not
// fit in out_capacity.
std::size_t build_frame(const FrameSpec& spec, const std::uint8_t* payload,
                        std::size_t payload_len, std::uint8_t* out, std::size_t out_capacity);

// Validates a received frame and yields the UDP payload bounds without
// copying. A zero UDP checksum on the wire means "not computed" and is
// accepted; any nonzero checksum is verified.
ParsedFrame parse_frame(const std::uint8_t* frame, std::size_t len);

}  // namespace dropkit

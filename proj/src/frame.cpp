#include "dropkit/frame.hpp"

#include <cstring>

namespace dropkit {

const char* to_string(FrameError e) {
  switch (e) {
    case FrameError::None: return "none";
    case FrameError::TooShort: return "too_short";
    case FrameError::NotIpv4: return "not_ipv4";
    case FrameError::BadIpHeader: return "bad_ip_header";
    case FrameError::Fragmented: return "fragmented";
    case FrameError::IpChecksum: return "ip_checksum";
    case FrameError::NotUdp: return "not_udp";
    case FrameError::UdpLength: return "udp_length";
    case FrameError::UdpChecksum: return "udp_checksum";
  }
  return "?";
}

namespace {
constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
constexpr std::uint8_t kProtoUdp = 17;

inline void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 8);
  p[1] = static_cast<std::uint8_t>(v);
}
inline void put_u32(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
}  // namespace

std::uint32_t checksum_accumulate(const std::uint8_t* data, std::size_t len,
                                  std::uint32_t initial) {
  std::uint32_t sum = initial;
  std::size_t i = 0;
  for (; i + 1 < len; i += 2) sum += static_cast<std::uint32_t>(get_u16(data + i));
  if (i < len) sum += static_cast<std::uint32_t>(data[i]) << 8;  // odd trailing byte
  return sum;
}

std::uint16_t checksum_finish(std::uint32_t sum) {
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

std::size_t build_frame(const FrameSpec& spec, const std::uint8_t* payload,
                        std::size_t payload_len, std::uint8_t* out, std::size_t out_capacity) {
  const std::size_t total =
      kEthHeaderSize + kIpv4HeaderSize + kUdpHeaderSize + payload_len;
  if (total > out_capacity) return 0;
  if (payload_len > 0xffff - kIpv4HeaderSize - kUdpHeaderSize) return 0;

  // Ethernet
  std::memcpy(out, spec.dst_mac.bytes.data(), 6);
  std::memcpy(out + 6, spec.src_mac.bytes.data(), 6);
  put_u16(out + 12, kEthertypeIpv4);

  // IPv4
  std::uint8_t* ip = out + kEthHeaderSize;
  const std::uint16_t ip_total = static_cast<std::uint16_t>(kIpv4HeaderSize + kUdpHeaderSize + payload_len);
  ip[0] = 0x45;  // version 4, IHL 5
  ip[1] = 0;
  put_u16(ip + 2, ip_total);
  put_u16(ip + 4, spec.ip_id);
  put_u16(ip + 6, 0x4000);  // don't fragment
  ip[8] = spec.ttl;
  ip[9] = kProtoUdp;
  put_u16(ip + 10, 0);  // checksum placeholder
  put_u32(ip + 12, spec.src_ip);
  put_u32(ip + 16, spec.dst_ip);
  put_u16(ip + 10, checksum_finish(checksum_accumulate(ip, kIpv4HeaderSize)));

  // UDP
  std::uint8_t* udp = ip + kIpv4HeaderSize;
  const std::uint16_t udp_len = static_cast<std::uint16_t>(kUdpHeaderSize + payload_len);
  put_u16(udp, spec.src_port);
  put_u16(udp + 2, spec.dst_port);
  put_u16(udp + 4, udp_len);
  put_u16(udp + 6, 0);  // checksum placeholder
  if (payload_len > 0) std::memcpy(udp + kUdpHeaderSize, payload, payload_len);

  // UDP checksum over pseudo-header + UDP header + payload
  std::uint8_t pseudo[12];
  put_u32(pseudo, spec.src_ip);
  put_u32(pseudo + 4, spec.dst_ip);
  pseudo[8] = 0;
  pseudo[9] = kProtoUdp;
  put_u16(pseudo + 10, udp_len);
  std::uint32_t sum = checksum_accumulate(pseudo, sizeof(pseudo));
  sum = checksum_accumulate(udp, udp_len, sum);
  std::uint16_t csum = checksum_finish(sum);
  if (csum == 0) csum = 0xffff;  // transmitted-as-zero means "no checksum"
  put_u16(udp + 6, csum);

  return total;
}

ParsedFrame parse_frame(const std::uint8_t* frame, std::size_t len) {
  ParsedFrame r;
  if (len < kEthHeaderSize + kIpv4HeaderSize + kUdpHeaderSize) {
    r.error = FrameError::TooShort;
    return r;
  }
  if (get_u16(frame + 12) != kEthertypeIpv4) {
    r.error = FrameError::NotIpv4;
    return r;
  }
  const std::uint8_t* ip = frame + kEthHeaderSize;
  if ((ip[0] >> 4) != 4) {
    r.error = FrameError::NotIpv4;
    return r;
  }
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
  const std::size_t ip_total = get_u16(ip + 2);
  if (ihl < kIpv4HeaderSize || ip_total < ihl + kUdpHeaderSize ||
      kEthHeaderSize + ip_total > len) {
    r.error = FrameError::BadIpHeader;
    return r;
  }
  // more-fragments flag or nonzero offset
  if ((get_u16(ip + 6) & 0x3fff) != 0) {
    r.error = FrameError::Fragmented;
    return r;
  }
  if (checksum_finish(checksum_accumulate(ip, ihl)) != 0) {
    r.error = FrameError::IpChecksum;
    return r;
  }
  if (ip[9] != kProtoUdp) {
    r.error = FrameError::NotUdp;
    return r;
  }
  const std::uint8_t* udp = ip + ihl;
  const std::uint16_t udp_len = get_u16(udp + 4);
  if (udp_len < kUdpHeaderSize || ihl + udp_len > ip_total) {
    r.error = FrameError::UdpLength;
    return r;
  }
  const std::uint16_t wire_csum = get_u16(udp + 6);
  if (wire_csum != 0) {
    std::uint8_t pseudo[12];
    std::memcpy(pseudo, ip + 12, 8);  // src + dst addresses
    pseudo[8] = 0;
    pseudo[9] = kProtoUdp;
    put_u16(pseudo + 10, udp_len);
    std::uint32_t sum = checksum_accumulate(pseudo, sizeof(pseudo));
    sum = checksum_accumulate(udp, udp_len, sum);
    if (checksum_finish(sum) != 0) {
      r.error = FrameError::UdpChecksum;
      return r;
    }
  }
  r.src_port = get_u16(udp);
  r.dst_port = get_u16(udp + 2);
  r.payload_offset = static_cast<std::uint32_t>(kEthHeaderSize + ihl + kUdpHeaderSize);
  r.payload_len = static_cast<std::uint32_t>(udp_len - kUdpHeaderSize);
  return r;
}

}  // namespace dropkit

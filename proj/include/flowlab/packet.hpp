#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "flowlab/pcap_io.hpp"

namespace flowlab {

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
inline constexpr std::uint8_t urg = 0x20;
inline constexpr std::uint8_t ece = 0x40;
inline constexpr std::uint8_t cwr = 0x80;
}  // namespace tcp_flag

// Transport view of an admitted IPv4 TCP/UDP packet. Addresses are host order.
struct PacketView {
  std::int64_t ts_ms = 0;
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  std::uint32_t ip_size = 0;       // IP total length (header + payload)
  std::uint32_t payload_size = 0;  // transport payload only
  std::uint8_t tcp_flags = 0;      // zero for UDP

  bool is_tcp() const { return protocol == kProtoTcp; }
  bool has_flag(std::uint8_t mask) const { return (tcp_flags & mask) != 0; }
  bool fin() const { return is_tcp() && has_flag(tcp_flag::fin); }
  bool rst() const { return is_tcp() && has_flag(tcp_flag::rst); }
};

enum class DropReason : std::uint8_t {
  unsupported_link,
  not_ipv4,
  not_tcp_udp,
  fragment,
  malformed,
};
inline constexpr std::size_t kDropReasonCount = 5;
const char* to_string(DropReason r);

struct AdmitStats {
  std::uint64_t admitted = 0;
  std::array<std::uint64_t, kDropReasonCount> dropped{};

  std::uint64_t total_dropped() const;
};

// Walks link -> IPv4 -> TCP/UDP. Anything else (IPv6, ICMP, VLAN-tagged or
// tunnelled frames, non-first fragments, truncated headers) is filtered out and
// counted in `stats` when provided.
std::optional<PacketView> admit(const RawPacket& packet, std::uint32_t link_type,
                                AdmitStats* stats = nullptr);

std::string format_ipv4(std::uint32_t addr);
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

}  // namespace flowlab

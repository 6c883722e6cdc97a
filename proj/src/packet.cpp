#include "flowlab/packet.hpp"

#include <charconv>
#include <numeric>

namespace flowlab {

namespace {

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }
std::uint32_t be32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3];
}

constexpr std::uint16_t kEtherIpv4 = 0x0800;

std::optional<PacketView> drop(AdmitStats* stats, DropReason why) {
  if (stats) ++stats->dropped[static_cast<std::size_t>(why)];
  return std::nullopt;
}

}  // namespace

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::unsupported_link: return "unsupported_link";
    case DropReason::not_ipv4: return "not_ipv4";
    case DropReason::not_tcp_udp: return "not_tcp_udp";
    case DropReason::fragment: return "fragment";
    case DropReason::malformed: return "malformed";
  }
  return "unknown";
}

std::uint64_t AdmitStats::total_dropped() const {
  return std::accumulate(dropped.begin(), dropped.end(), std::uint64_t{0});
}

std::optional<PacketView> admit(const RawPacket& packet, std::uint32_t link_type,
                                AdmitStats* stats) {
  const std::uint8_t* data = packet.frame.data();
  std::size_t len = packet.frame.size();
  std::size_t off = 0;

  switch (static_cast<LinkType>(link_type)) {
    case LinkType::ethernet:
      if (len < 14) return drop(stats, DropReason::malformed);
      if (be16(data + 12) != kEtherIpv4) return drop(stats, DropReason::not_ipv4);
      off = 14;
      break;
    case LinkType::linux_sll:
      if (len < 16) return drop(stats, DropReason::malformed);
      if (be16(data + 14) != kEtherIpv4) return drop(stats, DropReason::not_ipv4);
      off = 16;
      break;
    case LinkType::null_loopback: {
      if (len < 4) return drop(stats, DropReason::malformed);
      // Address family in capturing host order; AF_INET is 2 everywhere.
      const bool inet = (data[0] == 2 && data[1] == 0 && data[2] == 0 && data[3] == 0) ||
                        (data[0] == 0 && data[1] == 0 && data[2] == 0 && data[3] == 2);
      if (!inet) return drop(stats, DropReason::not_ipv4);
      off = 4;
      break;
    }
    case LinkType::raw_ip:
    case LinkType::ipv4:
      off = 0;
      break;
    default:
      return drop(stats, DropReason::unsupported_link);
  }

  if (len < off + 20) return drop(stats, DropReason::malformed);
  const std::uint8_t* ip = data + off;
  if ((ip[0] >> 4) != 4) return drop(stats, DropReason::not_ipv4);
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
  if (ihl < 20 || len < off + ihl) return drop(stats, DropReason::malformed);

  const std::uint8_t proto = ip[9];
  if (proto != kProtoTcp && proto != kProtoUdp) return drop(stats, DropReason::not_tcp_udp);
  if ((be16(ip + 6) & 0x1fff) != 0) return drop(stats, DropReason::fragment);

  std::size_t total = be16(ip + 2);
  if (total == 0) total = len - off;  // segmentation offload leaves this zeroed
  if (total < ihl) return drop(stats, DropReason::malformed);

  PacketView v;
  v.ts_ms = packet.ts_us / 1000;
  v.protocol = proto;
  v.src_ip = be32(ip + 12);
  v.dst_ip = be32(ip + 16);
  v.ip_size = static_cast<std::uint32_t>(total);

  const std::uint8_t* l4 = ip + ihl;
  const std::size_t l4_avail = len - off - ihl;
  std::size_t l4_hdr = 0;
  if (proto == kProtoTcp) {
    if (l4_avail < 20) return drop(stats, DropReason::malformed);
    l4_hdr = static_cast<std::size_t>(l4[12] >> 4) * 4;
    if (l4_hdr < 20) return drop(stats, DropReason::malformed);
    v.tcp_flags = l4[13];
  } else {
    if (l4_avail < 8) return drop(stats, DropReason::malformed);
    l4_hdr = 8;
  }
  if (total < ihl + l4_hdr) return drop(stats, DropReason::malformed);
  v.src_port = be16(l4);
  v.dst_port = be16(l4 + 2);
  v.payload_size = static_cast<std::uint32_t>(total - ihl - l4_hdr);

  if (stats) ++stats->admitted;
  return v;
}

std::string format_ipv4(std::uint32_t addr) {
  return std::to_string(addr >> 24) + '.' + std::to_string((addr >> 16) & 0xff) + '.' +
         std::to_string((addr >> 8) & 0xff) + '.' + std::to_string(addr & 0xff);
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t addr = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc{} || next == p || octet > 255 || next - p > 3) return std::nullopt;
    addr = addr << 8 | octet;
    p = next;
  }
  if (p != end) return std::nullopt;
  return addr;
}

}  // namespace flowlab

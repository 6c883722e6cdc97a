#pragma once

#include <cstdint>
#include <functional>
#include <tuple>

namespace flowlab {

enum class Direction : std::uint8_t { src2dst, dst2src };

// Oriented five-tuple: src is whoever sent the flow's first packet.
struct FlowKey {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;

  FlowKey reversed() const { return {dst_ip, src_ip, dst_port, src_port, protocol}; }

  // Orientation-free form: lower (ip, port) endpoint first.
  FlowKey canonical() const {
    if (std::tie(src_ip, src_port) <= std::tie(dst_ip, dst_port)) return *this;
    return reversed();
  }

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.src_ip} << 32) | k.dst_ip;
    h ^= (std::uint64_t{k.src_port} << 24 | std::uint64_t{k.dst_port} << 8 | k.protocol) *
         0x9e3779b97f4a7c15ULL;
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace flowlab

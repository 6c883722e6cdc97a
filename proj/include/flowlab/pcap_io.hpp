#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowlab {

// One captured frame. The timestamp lives in capture metadata, never in the
// frame bytes, so two frames with equal bytes are duplicates regardless of
// when they were captured.
struct RawPacket {
  std::int64_t ts_us = 0;
  std::vector<std::uint8_t> frame;
  std::uint32_t orig_len = 0;  // wire length; >= frame.size() when snapped

  std::size_t frame_len() const { return frame.size(); }
};

// Link types we know how to walk to the IP header.
enum class LinkType : std::uint32_t {
  null_loopback = 0,
  ethernet = 1,
  raw_ip = 101,
  linux_sll = 113,
  ipv4 = 228,
};

class PcapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reader for classic libpcap files (both byte orders, microsecond and
// nanosecond variants). Nanosecond timestamps are truncated to microseconds.
class PcapReader {
 public:
  explicit PcapReader(const std::string& path);

  std::uint32_t link_type() const { return link_type_; }
  std::uint32_t snaplen() const { return snaplen_; }
  bool nanosecond() const { return nanos_; }

  // Next record, or nullopt at clean end-of-file. A truncated trailing record
  // throws.
  std::optional<RawPacket> next();

  // Byte offset of the record the next call to next() will return.
  std::uint64_t tell();
  void seek(std::uint64_t offset);

 private:
  std::uint32_t read_u32(const unsigned char* p) const;

  std::string path_;
  std::ifstream in_;
  bool swapped_ = false;
  bool nanos_ = false;
  std::uint32_t link_type_ = 0;
  std::uint32_t snaplen_ = 0;
};

// Writes microsecond-resolution classic pcap in host byte order.
class PcapWriter {
 public:
  PcapWriter(const std::string& path, std::uint32_t link_type,
             std::uint32_t snaplen = 262144);

  void write(const RawPacket& packet);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<RawPacket> read_pcap(const std::string& path,
                                 std::uint32_t* link_type = nullptr);
void write_pcap(const std::string& path, const std::vector<RawPacket>& packets,
                std::uint32_t link_type = static_cast<std::uint32_t>(LinkType::ethernet));

}  // namespace flowlab

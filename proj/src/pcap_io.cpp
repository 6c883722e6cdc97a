#include "flowlab/pcap_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace flowlab {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kMaxRecord = 256 * 1024 * 1024;

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

}  // namespace

PcapReader::PcapReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw PcapError("cannot open capture: " + path);
  std::array<unsigned char, 24> hdr{};
  if (!in_.read(reinterpret_cast<char*>(hdr.data()), hdr.size()))
    throw PcapError("capture too short for a pcap header: " + path);

  std::uint32_t magic;
  std::memcpy(&magic, hdr.data(), 4);
  if (magic == kMagicMicros || magic == kMagicNanos) {
    swapped_ = false;
  } else if (bswap32(magic) == kMagicMicros || bswap32(magic) == kMagicNanos) {
    swapped_ = true;
    magic = bswap32(magic);
  } else {
    throw PcapError("not a classic pcap file (bad magic): " + path);
  }
  nanos_ = magic == kMagicNanos;
  snaplen_ = read_u32(hdr.data() + 16);
  link_type_ = read_u32(hdr.data() + 20) & 0x0fffffff;
}

std::uint32_t PcapReader::read_u32(const unsigned char* p) const {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return swapped_ ? bswap32(v) : v;
}

std::optional<RawPacket> PcapReader::next() {
  std::array<unsigned char, 16> rec{};
  in_.read(reinterpret_cast<char*>(rec.data()), rec.size());
  if (in_.gcount() == 0) return std::nullopt;
  if (in_.gcount() != static_cast<std::streamsize>(rec.size()))
    throw PcapError("truncated record header in " + path_);

  const std::uint32_t sec = read_u32(rec.data());
  const std::uint32_t frac = read_u32(rec.data() + 4);
  const std::uint32_t incl = read_u32(rec.data() + 8);
  const std::uint32_t orig = read_u32(rec.data() + 12);
  if (incl > kMaxRecord) throw PcapError("implausible record length in " + path_);

  RawPacket pkt;
  pkt.ts_us = static_cast<std::int64_t>(sec) * 1'000'000 + (nanos_ ? frac / 1000 : frac);
  pkt.orig_len = orig;
  pkt.frame.resize(incl);
  if (incl > 0 && !in_.read(reinterpret_cast<char*>(pkt.frame.data()), incl))
    throw PcapError("truncated record body in " + path_);
  return pkt;
}

std::uint64_t PcapReader::tell() {
  return static_cast<std::uint64_t>(in_.tellg());
}

void PcapReader::seek(std::uint64_t offset) {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(offset));
  if (!in_) throw PcapError("seek failed in " + path_);
}

PcapWriter::PcapWriter(const std::string& path, std::uint32_t link_type,
                       std::uint32_t snaplen)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw PcapError("cannot write capture: " + path);
  put<std::uint32_t>(out_, kMagicMicros);
  put<std::uint16_t>(out_, 2);
  put<std::uint16_t>(out_, 4);
  put<std::int32_t>(out_, 0);
  put<std::uint32_t>(out_, 0);
  put<std::uint32_t>(out_, snaplen);
  put<std::uint32_t>(out_, link_type);
}

void PcapWriter::write(const RawPacket& packet) {
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(packet.ts_us / 1'000'000));
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(packet.ts_us % 1'000'000));
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(packet.frame.size()));
  const auto orig = std::max<std::uint32_t>(packet.orig_len,
                                            static_cast<std::uint32_t>(packet.frame.size()));
  put<std::uint32_t>(out_, orig);
  out_.write(reinterpret_cast<const char*>(packet.frame.data()),
             static_cast<std::streamsize>(packet.frame.size()));
  if (!out_) throw PcapError("write failed: " + path_);
}

void PcapWriter::close() {
  out_.flush();
  if (!out_) throw PcapError("write failed: " + path_);
  out_.close();
}

std::vector<RawPacket> read_pcap(const std::string& path, std::uint32_t* link_type) {
  PcapReader reader(path);
  if (link_type) *link_type = reader.link_type();
  std::vector<RawPacket> out;
  while (auto pkt = reader.next()) out.push_back(std::move(*pkt));
  return out;
}

void write_pcap(const std::string& path, const std::vector<RawPacket>& packets,
                std::uint32_t link_type) {
  PcapWriter writer(path, link_type);
  for (const auto& p : packets) writer.write(p);
  writer.close();
}

}  // namespace flowlab

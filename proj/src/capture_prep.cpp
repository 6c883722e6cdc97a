#include "flowlab/capture_prep.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace flowlab::prep {

std::uint64_t frame_digest(std::span<const std::uint8_t> frame) {
  std::string_view bytes(reinterpret_cast<const char*>(frame.data()), frame.size());
  return std::hash<std::string_view>{}(bytes);
}

Deduplicator::Deduplicator(std::size_t window)
    : window_(window), ring_(window), ring_digest_(window) {
  if (window == 0) throw std::invalid_argument("dedup window must be >= 1");
  index_.reserve(window * 2);
}

bool Deduplicator::offer(std::span<const std::uint8_t> frame) {
  return offer(frame, frame_digest(frame));
}

bool Deduplicator::offer(std::span<const std::uint8_t> frame, std::uint64_t digest) {
  auto [lo, hi] = index_.equal_range(digest);
  for (auto it = lo; it != hi; ++it) {
    const auto& kept = ring_[it->second % window_];
    if (kept.size() == frame.size() &&
        std::equal(kept.begin(), kept.end(), frame.begin())) {
      ++removed_;
      return true;
    }
  }

  const std::uint64_t seq = retained_++;
  const std::size_t slot = seq % window_;
  if (seq >= window_) {
    // Evict the frame that just fell out of the window.
    const std::uint64_t old_seq = seq - window_;
    auto [olo, ohi] = index_.equal_range(ring_digest_[slot]);
    for (auto it = olo; it != ohi; ++it) {
      if (it->second == old_seq) {
        index_.erase(it);
        break;
      }
    }
  }
  ring_[slot].assign(frame.begin(), frame.end());
  ring_digest_[slot] = digest;
  index_.emplace(digest, seq);
  return false;
}

DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window) {
  Deduplicator dedup(window);
  DedupResult out;
  out.packets.reserve(packets.size());
  for (auto& p : packets) {
    if (!dedup.offer(p.frame)) out.packets.push_back(std::move(p));
  }
  out.duplicates_removed = dedup.removed();
  return out;
}

std::uint64_t count_out_of_order(std::span<const std::int64_t> timestamps) {
  std::uint64_t n = 0;
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] < timestamps[i - 1]) ++n;
  return n;
}

ReorderResult reorder(std::vector<RawPacket> packets) {
  ReorderResult out;
  for (std::size_t i = 1; i < packets.size(); ++i)
    if (packets[i].ts_us < packets[i - 1].ts_us) ++out.out_of_order;
  std::stable_sort(packets.begin(), packets.end(),
                   [](const RawPacket& a, const RawPacket& b) { return a.ts_us < b.ts_us; });
  out.packets = std::move(packets);
  return out;
}

CaptureSummary summarize(std::uint64_t packets_in, std::uint64_t duplicates_removed,
                         std::uint64_t out_of_order) {
  if (duplicates_removed > packets_in)
    throw std::invalid_argument("duplicates_removed exceeds packets_in");
  CaptureSummary s;
  s.packets_in = packets_in;
  s.duplicates_removed = duplicates_removed;
  s.frames_out = packets_in - duplicates_removed;
  s.out_of_order = out_of_order;
  if (packets_in > 0)
    s.duplicate_pct = static_cast<double>(duplicates_removed) / static_cast<double>(packets_in);
  if (s.frames_out > 0)
    s.out_of_order_pct = static_cast<double>(out_of_order) / static_cast<double>(s.frames_out);
  return s;
}

std::string summary_csv(const std::vector<std::pair<std::string, CaptureSummary>>& rows) {
  std::ostringstream os;
  os << "pcap,packets,duplicates,duplicate_pct,frames,out_of_order_frames,out_of_order_pct\n";
  char buf[64];
  for (const auto& [name, s] : rows) {
    os << name << ',' << s.packets_in << ',' << s.duplicates_removed << ',';
    std::snprintf(buf, sizeof buf, "%.6f", s.duplicate_pct);
    os << buf << ',' << s.frames_out << ',' << s.out_of_order << ',';
    std::snprintf(buf, sizeof buf, "%.6f", s.out_of_order_pct);
    os << buf << '\n';
  }
  return os.str();
}

std::string summary_table(const std::vector<std::pair<std::string, CaptureSummary>>& rows) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %14s %14s %12s %14s %14s %12s\n", "PCAP",
                "Packets", "Duplicates", "% Dup", "Frames", "Out of Order", "% OoO");
  os << line;
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof line, "%-16s %14llu %14llu %11.2f%% %14llu %14llu %11.2f%%\n",
                  name.c_str(), static_cast<unsigned long long>(s.packets_in),
                  static_cast<unsigned long long>(s.duplicates_removed), s.duplicate_pct * 100,
                  static_cast<unsigned long long>(s.frames_out),
                  static_cast<unsigned long long>(s.out_of_order), s.out_of_order_pct * 100);
    os << line;
  }
  return os.str();
}

CaptureSummary prepare_capture(const std::string& in_path, const std::string& out_path,
                               std::size_t window) {
  struct Slot {
    std::int64_t ts_us;
    std::uint64_t offset;
  };

  PcapReader reader(in_path);
  Deduplicator dedup(window);
  std::vector<Slot> kept;
  std::uint64_t packets_in = 0;
  for (;;) {
    const std::uint64_t offset = reader.tell();
    auto pkt = reader.next();
    if (!pkt) break;
    ++packets_in;
    if (!dedup.offer(pkt->frame)) kept.push_back({pkt->ts_us, offset});
  }

  std::uint64_t out_of_order = 0;
  for (std::size_t i = 1; i < kept.size(); ++i)
    if (kept[i].ts_us < kept[i - 1].ts_us) ++out_of_order;
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Slot& a, const Slot& b) { return a.ts_us < b.ts_us; });

  PcapWriter writer(out_path, reader.link_type(), std::max<std::uint32_t>(reader.snaplen(), 65535));
  for (const auto& slot : kept) {
    reader.seek(slot.offset);
    auto pkt = reader.next();
    if (!pkt) throw PcapError("capture changed while being prepared: " + in_path);
    writer.write(*pkt);
  }
  writer.close();
  return summarize(packets_in, dedup.removed(), out_of_order);
}

}  // namespace flowlab::prep

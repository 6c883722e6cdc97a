#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flowlab/pcap_io.hpp"

namespace flowlab::prep {

inline constexpr std::size_t kDefaultDedupWindow = 10'000;

// Digest used to shortlist duplicate candidates. Equal digests are always
// confirmed by a full byte comparison.
std::uint64_t frame_digest(std::span<const std::uint8_t> frame);

// Sliding-window duplicate detector over RETAINED frames: a frame is a
// duplicate iff its bytes equal one of the last `window` frames that were
// kept. Removed duplicates never enter the window.
class Deduplicator {
 public:
  explicit Deduplicator(std::size_t window);

  // Returns true when the frame is a duplicate (caller drops it); otherwise
  // the frame is recorded as retained and false is returned.
  bool offer(std::span<const std::uint8_t> frame);
  bool offer(std::span<const std::uint8_t> frame, std::uint64_t digest);

  std::uint64_t removed() const { return removed_; }
  std::uint64_t retained() const { return retained_; }

 private:
  std::size_t window_;
  std::vector<std::vector<std::uint8_t>> ring_;  // indexed by seq % window
  std::vector<std::uint64_t> ring_digest_;
  std::unordered_multimap<std::uint64_t, std::uint64_t> index_;  // digest -> seq
  std::uint64_t retained_ = 0;
  std::uint64_t removed_ = 0;
};

struct DedupResult {
  std::vector<RawPacket> packets;
  std::uint64_t duplicates_removed = 0;
};

// Throws std::invalid_argument when window == 0.
DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window);

struct ReorderResult {
  std::vector<RawPacket> packets;
  std::uint64_t out_of_order = 0;
};

// Number of positions i with ts[i] < ts[i-1].
std::uint64_t count_out_of_order(std::span<const std::int64_t> timestamps);

// Stable sort by capture timestamp.
ReorderResult reorder(std::vector<RawPacket> packets);

struct CaptureSummary {
  std::uint64_t packets_in = 0;
  std::uint64_t duplicates_removed = 0;
  double duplicate_pct = 0.0;  // ratio in [0, 1]
  std::uint64_t frames_out = 0;
  std::uint64_t out_of_order = 0;
  double out_of_order_pct = 0.0;  // ratio in [0, 1], relative to frames_out
};

CaptureSummary summarize(std::uint64_t packets_in, std::uint64_t duplicates_removed,
                         std::uint64_t out_of_order);

// CSV with the six summary columns, one row per named capture.
std::string summary_csv(const std::vector<std::pair<std::string, CaptureSummary>>& rows);
// Aligned text table, percentages shown with two decimals.
std::string summary_table(const std::vector<std::pair<std::string, CaptureSummary>>& rows);

// Streaming dedup + chronological reorder of a capture file. Memory is bounded
// by the dedup window plus one (timestamp, offset) pair per retained frame.
CaptureSummary prepare_capture(const std::string& in_path, const std::string& out_path,
                               std::size_t window = kDefaultDedupWindow);

}  // namespace flowlab::prep

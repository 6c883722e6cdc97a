#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "flowlab/flow_key.hpp"
#include "flowlab/packet.hpp"

namespace flowlab {

// Single-pass count/min/max/mean/variance (Welford). Sample (n-1) variance;
// every statistic reads as 0 until it is defined.
class StatAccumulator {
 public:
  void push(double x) {
    ++count_;
    if (count_ == 1) {
      min_ = max_ = mean_ = x;
      m2_ = 0.0;
      return;
    }
    if (x < min_) min_ = x;
    if (x > max_) max_ = x;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const { return count_; }
  double min() const { return count_ ? min_ : 0.0; }
  double max() const { return count_ ? max_ : 0.0; }
  double mean() const { return count_ ? mean_ : 0.0; }
  double variance() const {
    return count_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(count_ - 1));
  }
  double stddev() const;

 private:
  std::uint64_t count_ = 0;
  double min_ = 0.0;
  double max_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Accumulators for one scope (both directions, or a single direction).
struct ScopeStats {
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t payload_bytes = 0;
  StatAccumulator size;  // octets
  StatAccumulator iat;   // milliseconds between consecutive packets of the scope
  std::int64_t last_ts_ms = 0;
  std::uint64_t psh = 0;
  std::uint64_t urg = 0;
};

enum class FlagIndex : std::uint8_t { fin, syn, rst, psh, ack, urg, cwr, ece };
inline constexpr std::size_t kFlagCount = 8;

struct FlowStats {
  ScopeStats bidirectional;
  ScopeStats src2dst;
  ScopeStats dst2src;
  std::array<std::uint64_t, kFlagCount> flags{};

  std::uint64_t flag(FlagIndex f) const { return flags[static_cast<std::size_t>(f)]; }
};

// Live per-flow state owned by the flow cache.
struct FlowRecord {
  FlowKey key;
  std::int64_t first_seen_ms = 0;
  std::int64_t last_seen_ms = 0;
  int expiration_id = 0;  // -1 policy, 0 idle/flush, 1 active
  FlowStats stats;

  std::uint64_t bidirectional_packets() const { return stats.bidirectional.packets; }
};

// The 41 exported statistical features, in export order.
enum class Feature : std::uint8_t {
  src2dst_packets,
  dst2src_packets,
  src2dst_bytes,
  dst2src_bytes,
  bidirectional_duration_ms,
  bidirectional_min_ps,
  bidirectional_max_ps,
  bidirectional_mean_ps,
  bidirectional_stddev_ps,
  src2dst_max_ps,
  src2dst_min_ps,
  src2dst_mean_ps,
  src2dst_stddev_ps,
  dst2src_max_ps,
  dst2src_min_ps,
  dst2src_mean_ps,
  dst2src_stddev_ps,
  bidirectional_mean_piat_ms,
  bidirectional_stddev_piat_ms,
  bidirectional_max_piat_ms,
  bidirectional_min_piat_ms,
  src2dst_mean_piat_ms,
  src2dst_stddev_piat_ms,
  src2dst_max_piat_ms,
  src2dst_min_piat_ms,
  dst2src_mean_piat_ms,
  dst2src_stddev_piat_ms,
  dst2src_max_piat_ms,
  dst2src_min_piat_ms,
  bidirectional_fin_packets,
  bidirectional_syn_packets,
  bidirectional_rst_packets,
  bidirectional_psh_packets,
  bidirectional_ack_packets,
  bidirectional_urg_packets,
  bidirectional_cwr_packets,
  bidirectional_ece_packets,
  src2dst_psh_packets,
  dst2src_psh_packets,
  src2dst_urg_packets,
  dst2src_urg_packets,
};
inline constexpr std::size_t kFeatureCount = 41;

struct FeatureInfo {
  std::string_view name;
  bool integral;  // rendered without a decimal point
};

const std::array<FeatureInfo, kFeatureCount>& feature_table();
inline std::string_view feature_name(Feature f) {
  return feature_table()[static_cast<std::size_t>(f)].name;
}

// Finalized, immutable flow as exported. `label` is empty until labeled.
struct FeatureVector {
  FlowKey key;
  std::array<double, kFeatureCount> values{};
  std::int64_t first_seen_ms = 0;
  std::int64_t last_seen_ms = 0;
  int expiration_id = 0;
  std::uint64_t src2dst_payload_bytes = 0;
  std::uint64_t dst2src_payload_bytes = 0;
  std::string label;

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

  std::uint64_t bidirectional_packets() const {
    return static_cast<std::uint64_t>((*this)[Feature::src2dst_packets] +
                                      (*this)[Feature::dst2src_packets]);
  }
  std::uint64_t total_payload_bytes() const {
    return src2dst_payload_bytes + dst2src_payload_bytes;
  }
};

using LabeledFlow = FeatureVector;

// Seeds a freshly created flow from its first packet.
void init_stats(FlowRecord& flow, const PacketView& packet);
// Counts `packet` into the flow in the given direction.
void update_stats(FlowRecord& flow, const PacketView& packet, Direction dir);

FeatureVector finalize(const FlowRecord& flow);

}  // namespace flowlab

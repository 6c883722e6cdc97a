#include "flowlab/flow_features.hpp"

#include <cmath>

namespace flowlab {

double StatAccumulator::stddev() const { return std::sqrt(variance()); }

const std::array<FeatureInfo, kFeatureCount>& feature_table() {
  static const std::array<FeatureInfo, kFeatureCount> table{{
      {"src2dst_packets", true},
      {"dst2src_packets", true},
      {"src2dst_bytes", true},
      {"dst2src_bytes", true},
      {"bidirectional_duration_ms", true},
      {"bidirectional_min_ps", true},
      {"bidirectional_max_ps", true},
      {"bidirectional_mean_ps", false},
      {"bidirectional_stddev_ps", false},
      {"src2dst_max_ps", true},
      {"src2dst_min_ps", true},
      {"src2dst_mean_ps", false},
      {"src2dst_stddev_ps", false},
      {"dst2src_max_ps", true},
      {"dst2src_min_ps", true},
      {"dst2src_mean_ps", false},
      {"dst2src_stddev_ps", false},
      {"bidirectional_mean_piat_ms", false},
      {"bidirectional_stddev_piat_ms", false},
      {"bidirectional_max_piat_ms", true},
      {"bidirectional_min_piat_ms", true},
      {"src2dst_mean_piat_ms", false},
      {"src2dst_stddev_piat_ms", false},
      {"src2dst_max_piat_ms", true},
      {"src2dst_min_piat_ms", true},
      {"dst2src_mean_piat_ms", false},
      {"dst2src_stddev_piat_ms", false},
      {"dst2src_max_piat_ms", true},
      {"dst2src_min_piat_ms", true},
      {"bidirectional_fin_packets", true},
      {"bidirectional_syn_packets", true},
      {"bidirectional_rst_packets", true},
      {"bidirectional_psh_packets", true},
      {"bidirectional_ack_packets", true},
      {"bidirectional_urg_packets", true},
      {"bidirectional_cwr_packets", true},
      {"bidirectional_ece_packets", true},
      {"src2dst_psh_packets", true},
      {"dst2src_psh_packets", true},
      {"src2dst_urg_packets", true},
      {"dst2src_urg_packets", true},
  }};
  return table;
}

namespace {

void push_scope(ScopeStats& scope, const PacketView& p) {
  if (scope.packets > 0) {
    // Out-of-order timestamps never produce a negative gap.
    const std::int64_t gap = std::max<std::int64_t>(0, p.ts_ms - scope.last_ts_ms);
    scope.iat.push(static_cast<double>(gap));
  }
  if (scope.packets == 0 || p.ts_ms > scope.last_ts_ms) scope.last_ts_ms = p.ts_ms;
  ++scope.packets;
  scope.bytes += p.ip_size;
  scope.payload_bytes += p.payload_size;
  scope.size.push(static_cast<double>(p.ip_size));
  if (p.has_flag(tcp_flag::psh)) ++scope.psh;
  if (p.has_flag(tcp_flag::urg)) ++scope.urg;
}

}  // namespace

void init_stats(FlowRecord& flow, const PacketView& packet) {
  flow.key = {packet.src_ip, packet.dst_ip, packet.src_port, packet.dst_port, packet.protocol};
  flow.first_seen_ms = packet.ts_ms;
  flow.last_seen_ms = packet.ts_ms;
  flow.expiration_id = 0;
  flow.stats = FlowStats{};
  update_stats(flow, packet, Direction::src2dst);
}

void update_stats(FlowRecord& flow, const PacketView& packet, Direction dir) {
  FlowStats& s = flow.stats;
  push_scope(s.bidirectional, packet);
  push_scope(dir == Direction::src2dst ? s.src2dst : s.dst2src, packet);

  static constexpr std::array<std::uint8_t, kFlagCount> masks{
      tcp_flag::fin, tcp_flag::syn, tcp_flag::rst, tcp_flag::psh,
      tcp_flag::ack, tcp_flag::urg, tcp_flag::cwr, tcp_flag::ece};
  for (std::size_t i = 0; i < kFlagCount; ++i)
    if (packet.has_flag(masks[i])) ++s.flags[i];

  if (packet.ts_ms > flow.last_seen_ms) flow.last_seen_ms = packet.ts_ms;
}

FeatureVector finalize(const FlowRecord& flow) {
  const FlowStats& s = flow.stats;
  FeatureVector v;
  v.key = flow.key;
  v.first_seen_ms = flow.first_seen_ms;
  v.last_seen_ms = flow.last_seen_ms;
  v.expiration_id = flow.expiration_id;
  v.src2dst_payload_bytes = s.src2dst.payload_bytes;
  v.dst2src_payload_bytes = s.dst2src.payload_bytes;

  auto u = [](std::uint64_t x) { return static_cast<double>(x); };
  using F = Feature;
  v[F::src2dst_packets] = u(s.src2dst.packets);
  v[F::dst2src_packets] = u(s.dst2src.packets);
  v[F::src2dst_bytes] = u(s.src2dst.bytes);
  v[F::dst2src_bytes] = u(s.dst2src.bytes);
  v[F::bidirectional_duration_ms] = static_cast<double>(flow.last_seen_ms - flow.first_seen_ms);

  v[F::bidirectional_min_ps] = s.bidirectional.size.min();
  v[F::bidirectional_max_ps] = s.bidirectional.size.max();
  v[F::bidirectional_mean_ps] = s.bidirectional.size.mean();
  v[F::bidirectional_stddev_ps] = s.bidirectional.size.stddev();
  v[F::src2dst_max_ps] = s.src2dst.size.max();
  v[F::src2dst_min_ps] = s.src2dst.size.min();
  v[F::src2dst_mean_ps] = s.src2dst.size.mean();
  v[F::src2dst_stddev_ps] = s.src2dst.size.stddev();
  v[F::dst2src_max_ps] = s.dst2src.size.max();
  v[F::dst2src_min_ps] = s.dst2src.size.min();
  v[F::dst2src_mean_ps] = s.dst2src.size.mean();
  v[F::dst2src_stddev_ps] = s.dst2src.size.stddev();

  v[F::bidirectional_mean_piat_ms] = s.bidirectional.iat.mean();
  v[F::bidirectional_stddev_piat_ms] = s.bidirectional.iat.stddev();
  v[F::bidirectional_max_piat_ms] = s.bidirectional.iat.max();
  v[F::bidirectional_min_piat_ms] = s.bidirectional.iat.min();
  v[F::src2dst_mean_piat_ms] = s.src2dst.iat.mean();
  v[F::src2dst_stddev_piat_ms] = s.src2dst.iat.stddev();
  v[F::src2dst_max_piat_ms] = s.src2dst.iat.max();
  v[F::src2dst_min_piat_ms] = s.src2dst.iat.min();
  v[F::dst2src_mean_piat_ms] = s.dst2src.iat.mean();
  v[F::dst2src_stddev_piat_ms] = s.dst2src.iat.stddev();
  v[F::dst2src_max_piat_ms] = s.dst2src.iat.max();
  v[F::dst2src_min_piat_ms] = s.dst2src.iat.min();

  for (std::size_t i = 0; i < kFlagCount; ++i)
    v.values[static_cast<std::size_t>(F::bidirectional_fin_packets) + i] = u(s.flags[i]);

  v[F::src2dst_psh_packets] = u(s.src2dst.psh);
  v[F::dst2src_psh_packets] = u(s.dst2src.psh);
  v[F::src2dst_urg_packets] = u(s.src2dst.urg);
  v[F::dst2src_urg_packets] = u(s.dst2src.urg);
  return v;
}

}  // namespace flowlab

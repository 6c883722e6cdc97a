#include "flowlab/flow_engine.hpp"

#include <stdexcept>

#include "flowlab/expiration_policy.hpp"

namespace flowlab {

void MeterConfig::validate() const {
  if (idle_timeout_ms <= 0) throw std::invalid_argument("idle timeout must be positive");
  if (active_timeout_ms <= 0) throw std::invalid_argument("active timeout must be positive");
}

TimeoutDecision check_timeouts(const FlowRecord& flow, std::int64_t packet_ts_ms,
                               const MeterConfig& config, bool* non_monotonic) {
  std::int64_t gap = packet_ts_ms - flow.last_seen_ms;
  if (non_monotonic) *non_monotonic = gap < 0;
  if (gap < 0) gap = 0;
  if (gap > config.idle_timeout_ms) return TimeoutDecision::idle;
  if (packet_ts_ms - flow.first_seen_ms > config.active_timeout_ms) return TimeoutDecision::active;
  return TimeoutDecision::none;
}

FlowMeter::FlowMeter(MeterConfig config, std::uint32_t link_type)
    : config_(config), link_type_(link_type) {
  config_.validate();
  if (config_.tcp_expiry_enabled) policies_.push_back(std::make_unique<TcpFlagExpiry>());
}

void FlowMeter::add_policy(std::unique_ptr<FlowPolicy> policy) {
  policies_.push_back(std::move(policy));
}

void FlowMeter::process(const RawPacket& packet, std::vector<FlowRecord>& out) {
  ++stats_.packets_seen;
  if (auto view = admit(packet, link_type_, &stats_.admit)) process(*view, out);
}

FlowRecord* FlowMeter::create(const PacketView& packet) {
  lru_.emplace_back();
  auto it = std::prev(lru_.end());
  FlowRecord& flow = *it;
  init_stats(flow, packet);
  index_.emplace(flow.key.canonical(), it);
  ++stats_.flows_created;
  for (auto& policy : policies_) {
    int id = flow.expiration_id;
    policy->on_init(packet, flow, id);
    flow.expiration_id = id;
  }
  return &flow;
}

FlowMeter::Lookup FlowMeter::lookup_or_create(const PacketView& packet) {
  const FlowKey key{packet.src_ip, packet.dst_ip, packet.src_port, packet.dst_port,
                    packet.protocol};
  if (auto hit = index_.find(key.canonical()); hit != index_.end()) {
    FlowRecord& flow = *hit->second;
    return {&flow, flow.key == key ? Direction::src2dst : Direction::dst2src, false};
  }
  return {create(packet), Direction::src2dst, true};
}

const FlowRecord* FlowMeter::find(const FlowKey& key) const {
  auto hit = index_.find(key.canonical());
  return hit == index_.end() ? nullptr : &*hit->second;
}

void FlowMeter::touch(Lru::iterator it) {
  lru_.splice(lru_.end(), lru_, it);
}

void FlowMeter::emit(Lru::iterator it, int expiration_id, std::vector<FlowRecord>& out) {
  it->expiration_id = expiration_id;
  switch (expiration_id) {
    case kExpirePolicy: ++stats_.expired_policy; break;
    case kExpireActive: ++stats_.expired_active; break;
    default: ++stats_.expired_idle; break;
  }
  index_.erase(it->key.canonical());
  out.push_back(std::move(*it));
  lru_.erase(it);
}

void FlowMeter::sweep_idle(std::int64_t now_ms, std::vector<FlowRecord>& out) {
  while (!lru_.empty() && now_ms - lru_.front().last_seen_ms > config_.idle_timeout_ms)
    emit(lru_.begin(), kExpireIdle, out);
}

void FlowMeter::process(const PacketView& packet, std::vector<FlowRecord>& out) {
  if (config_.idle_sweep) sweep_idle(packet.ts_ms, out);

  const FlowKey key{packet.src_ip, packet.dst_ip, packet.src_port, packet.dst_port,
                    packet.protocol};
  Lru::iterator it;
  if (auto hit = index_.find(key.canonical()); hit != index_.end()) {
    it = hit->second;
    bool non_monotonic = false;
    const auto decision = check_timeouts(*it, packet.ts_ms, config_, &non_monotonic);
    if (non_monotonic) ++stats_.non_monotonic;
    if (decision != TimeoutDecision::none) {
      emit(it, decision == TimeoutDecision::idle ? kExpireIdle : kExpireActive, out);
      create(packet);
      it = std::prev(lru_.end());
    } else {
      FlowRecord& flow = *it;
      update_stats(flow, packet, flow.key == key ? Direction::src2dst : Direction::dst2src);
      for (auto& policy : policies_) {
        int id = flow.expiration_id;
        policy->on_update(packet, flow, id);
        flow.expiration_id = id;
      }
      touch(it);
    }
  } else {
    create(packet);
    it = std::prev(lru_.end());
  }

  if (it->expiration_id == kExpirePolicy) emit(it, kExpirePolicy, out);
}

void FlowMeter::flush(std::vector<FlowRecord>& out) {
  while (!lru_.empty()) {
    auto it = lru_.begin();
    it->expiration_id = kExpireIdle;
    ++stats_.flushed;
    out.push_back(std::move(*it));
    lru_.erase(it);
  }
  index_.clear();
}

std::vector<FlowRecord> meter_packets(const std::vector<RawPacket>& packets,
                                      const MeterConfig& config, std::uint32_t link_type,
                                      MeterStats* stats) {
  FlowMeter meter(config, link_type);
  std::vector<FlowRecord> out;
  for (const auto& p : packets) meter.process(p, out);
  meter.flush(out);
  if (stats) *stats = meter.stats();
  return out;
}

}  // namespace flowlab

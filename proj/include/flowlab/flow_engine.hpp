#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <unordered_map>
#include <vector>

#include "flowlab/flow_features.hpp"
#include "flowlab/packet.hpp"
#include "flowlab/pcap_io.hpp"

namespace flowlab {

inline constexpr int kExpirePolicy = -1;
inline constexpr int kExpireIdle = 0;
inline constexpr int kExpireActive = 1;

struct MeterConfig {
  std::int64_t idle_timeout_ms = 60'000;
  std::int64_t active_timeout_ms = 120'000;
  bool tcp_expiry_enabled = true;
  // Reap idle flows as packet time advances instead of holding them until
  // their next packet or the final flush. Yields the same flows and
  // expiration ids; only emission order and memory use change.
  bool idle_sweep = true;

  // Throws std::invalid_argument on non-positive timeouts.
  void validate() const;
};

// Per-flow hooks run after the packet has been counted. A hook may only touch
// the expiration id; -1 asks the engine to expire the flow right away.
class FlowPolicy {
 public:
  virtual ~FlowPolicy() = default;
  virtual void on_init(const PacketView& packet, const FlowRecord& flow, int& expiration_id) = 0;
  virtual void on_update(const PacketView& packet, const FlowRecord& flow, int& expiration_id) = 0;
};

enum class TimeoutDecision : std::uint8_t { none, idle, active };

// Evaluated when a matching packet arrives, before it is applied. Both limits
// are strict: a gap exactly equal to the idle timeout stays in the flow.
// Sets *non_monotonic when the packet predates the flow's last packet; that
// case is treated as a zero gap.
TimeoutDecision check_timeouts(const FlowRecord& flow, std::int64_t packet_ts_ms,
                               const MeterConfig& config, bool* non_monotonic = nullptr);

struct MeterStats {
  AdmitStats admit;
  std::uint64_t packets_seen = 0;
  std::uint64_t non_monotonic = 0;
  std::uint64_t flows_created = 0;
  std::uint64_t expired_policy = 0;
  std::uint64_t expired_idle = 0;
  std::uint64_t expired_active = 0;
  std::uint64_t flushed = 0;

  std::uint64_t flows_emitted() const {
    return expired_policy + expired_idle + expired_active + flushed;
  }
};

// Bidirectional flow cache. Single writer: feed packets in capture order.
class FlowMeter {
 public:
  explicit FlowMeter(MeterConfig config, std::uint32_t link_type =
                                             static_cast<std::uint32_t>(LinkType::ethernet));

  // Adds a policy hook; the TCP FIN/RST policy is installed automatically when
  // config.tcp_expiry_enabled is set.
  void add_policy(std::unique_ptr<FlowPolicy> policy);

  // Admits and routes one frame; expired flows are appended to `out`.
  void process(const RawPacket& packet, std::vector<FlowRecord>& out);
  // Same, for an already admitted packet.
  void process(const PacketView& packet, std::vector<FlowRecord>& out);

  // Emits every live flow (expiration id 0) and empties the cache.
  void flush(std::vector<FlowRecord>& out);

  struct Lookup {
    FlowRecord* flow;
    Direction direction;
    bool created;
  };
  // Finds the live flow matching the packet's five-tuple in either
  // orientation, or creates one oriented by this packet (on_init hooks run).
  Lookup lookup_or_create(const PacketView& packet);

  const FlowRecord* find(const FlowKey& key) const;
  std::size_t live_flows() const { return lru_.size(); }
  const MeterStats& stats() const { return stats_; }
  const MeterConfig& config() const { return config_; }

 private:
  using Lru = std::list<FlowRecord>;

  FlowRecord* create(const PacketView& packet);
  void emit(Lru::iterator it, int expiration_id, std::vector<FlowRecord>& out);
  void sweep_idle(std::int64_t now_ms, std::vector<FlowRecord>& out);
  void touch(Lru::iterator it);

  MeterConfig config_;
  std::uint32_t link_type_;
  std::vector<std::unique_ptr<FlowPolicy>> policies_;
  Lru lru_;  // oldest last_seen first
  std::unordered_map<FlowKey, Lru::iterator, FlowKeyHash> index_;  // canonical key
  MeterStats stats_;
};

// Meters a whole packet sequence and flushes; returns records in emission order.
std::vector<FlowRecord> meter_packets(const std::vector<RawPacket>& packets,
                                      const MeterConfig& config, std::uint32_t link_type,
                                      MeterStats* stats = nullptr);

}  // namespace flowlab

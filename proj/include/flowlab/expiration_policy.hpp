#pragma once

#include "flowlab/flow_engine.hpp"

namespace flowlab {

// Expires a TCP flow on the first packet carrying FIN or RST, whether that
// packet opened the flow or updated it. UDP flows are never touched. The
// triggering packet is already counted, so emitted flows carry at most one
// FIN and one RST, and that packet is the flow's last.
class TcpFlagExpiry final : public FlowPolicy {
 public:
  void on_init(const PacketView& packet, const FlowRecord& flow, int& expiration_id) override;
  void on_update(const PacketView& packet, const FlowRecord& flow, int& expiration_id) override;
};

}  // namespace flowlab

#include "flowlab/expiration_policy.hpp"

namespace flowlab {

namespace {

void mark_on_fin_or_rst(const PacketView& packet, int& expiration_id) {
  if (packet.rst() || packet.fin()) expiration_id = kExpirePolicy;
}

}  // namespace

void TcpFlagExpiry::on_init(const PacketView& packet, const FlowRecord&, int& expiration_id) {
  mark_on_fin_or_rst(packet, expiration_id);
}

void TcpFlagExpiry::on_update(const PacketView& packet, const FlowRecord&, int& expiration_id) {
  mark_on_fin_or_rst(packet, expiration_id);
}

}  // namespace flowlab

#pragma once

// Data-parallel batch kernels. Every kernel has a serial reference in
// kernels::serial with the same signature and the same results; tests pin the
// two together and bench/ compares their throughput.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowlab/capture_prep.hpp"
#include "flowlab/dataset_audit.hpp"
#include "flowlab/flow_features.hpp"
#include "flowlab/labeler.hpp"
#include "flowlab/pcap_io.hpp"
#include "flowlab/post_filter.hpp"

namespace flowlab::kernels {

struct LabelCounts {
  std::uint64_t matched = 0;
  std::uint64_t ambiguous = 0;
  std::uint64_t zpl_overrides = 0;
};

std::vector<std::uint64_t> frame_digests(std::span<const RawPacket> packets);
// Digests in parallel; the window scan itself stays sequential.
prep::DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window);
std::vector<FeatureVector> finalize_all(std::span<const FlowRecord> flows);
LabelCounts label_flows(std::span<LabeledFlow> flows, std::span<const label::LabelRule> rules,
                        const label::LabelOptions& options = {});
std::vector<std::uint8_t> keep_mask(std::span<const LabeledFlow> flows, post::FilterMode mode);
audit::AuditReport audit_lines(std::span<const std::string> lines, const audit::ResolvedColumns& cols,
                               const audit::ColumnMapping& mapping);

namespace serial {
std::vector<std::uint64_t> frame_digests(std::span<const RawPacket> packets);
prep::DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window);
std::vector<FeatureVector> finalize_all(std::span<const FlowRecord> flows);
LabelCounts label_flows(std::span<LabeledFlow> flows, std::span<const label::LabelRule> rules,
                        const label::LabelOptions& options = {});
std::vector<std::uint8_t> keep_mask(std::span<const LabeledFlow> flows, post::FilterMode mode);
audit::AuditReport audit_lines(std::span<const std::string> lines, const audit::ResolvedColumns& cols,
                               const audit::ColumnMapping& mapping);
}  // namespace serial

}  // namespace flowlab::kernels

#include "flowlab/kernels.hpp"

#include <omp.h>

#include "flowlab/flow_csv.hpp"

namespace flowlab::kernels {

namespace {

prep::DedupResult dedup_with_digests(std::vector<RawPacket> packets,
                                     const std::vector<std::uint64_t>& digests, std::size_t window) {
  prep::Deduplicator dedup(window);
  prep::DedupResult out;
  out.packets.reserve(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i)
    if (!dedup.offer(packets[i].frame, digests[i])) out.packets.push_back(std::move(packets[i]));
  out.duplicates_removed = dedup.removed();
  return out;
}

}  // namespace

namespace serial {

std::vector<std::uint64_t> frame_digests(std::span<const RawPacket> packets) {
  std::vector<std::uint64_t> out(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) out[i] = prep::frame_digest(packets[i].frame);
  return out;
}

prep::DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window) {
  return prep::deduplicate(std::move(packets), window);
}

std::vector<FeatureVector> finalize_all(std::span<const FlowRecord> flows) {
  std::vector<FeatureVector> out;
  out.reserve(flows.size());
  for (const auto& f : flows) out.push_back(finalize(f));
  return out;
}

LabelCounts label_flows(std::span<LabeledFlow> flows, std::span<const label::LabelRule> rules,
                        const label::LabelOptions& options) {
  LabelCounts c;
  for (auto& f : flows) {
    auto d = label::decide_label(f, rules, options);
    c.matched += d.rule_index >= 0;
    c.ambiguous += d.ambiguous;
    c.zpl_overrides += d.zpl_override;
    f.label = std::move(d.label);
  }
  return c;
}

std::vector<std::uint8_t> keep_mask(std::span<const LabeledFlow> flows, post::FilterMode mode) {
  std::vector<std::uint8_t> out(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) out[i] = post::keep_flow(flows[i], mode);
  return out;
}

audit::AuditReport audit_lines(std::span<const std::string> lines, const audit::ResolvedColumns& cols,
                               const audit::ColumnMapping& mapping) {
  audit::AuditReport r;
  std::vector<std::string> fields;
  for (const auto& line : lines) {
    if (line.empty() || line == "\r") continue;
    csv::split_line(line, fields);
    audit::audit_row(fields, cols, mapping, r);
  }
  return r;
}

}  // namespace serial

std::vector<std::uint64_t> frame_digests(std::span<const RawPacket> packets) {
  std::vector<std::uint64_t> out(packets.size());
  const auto n = static_cast<std::int64_t>(packets.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = prep::frame_digest(packets[i].frame);
  return out;
}

prep::DedupResult deduplicate(std::vector<RawPacket> packets, std::size_t window) {
  const auto digests = frame_digests(packets);
  return dedup_with_digests(std::move(packets), digests, window);
}

std::vector<FeatureVector> finalize_all(std::span<const FlowRecord> flows) {
  std::vector<FeatureVector> out(flows.size());
  const auto n = static_cast<std::int64_t>(flows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = finalize(flows[i]);
  return out;
}

LabelCounts label_flows(std::span<LabeledFlow> flows, std::span<const label::LabelRule> rules,
                        const label::LabelOptions& options) {
  std::uint64_t matched = 0, ambiguous = 0, zpl = 0;
  const auto n = static_cast<std::int64_t>(flows.size());
#pragma omp parallel for schedule(dynamic, 1024) reduction(+ : matched, ambiguous, zpl)
  for (std::int64_t i = 0; i < n; ++i) {
    auto d = label::decide_label(flows[i], rules, options);
    matched += d.rule_index >= 0;
    ambiguous += d.ambiguous;
    zpl += d.zpl_override;
    flows[i].label = std::move(d.label);
  }
  return {matched, ambiguous, zpl};
}

std::vector<std::uint8_t> keep_mask(std::span<const LabeledFlow> flows, post::FilterMode mode) {
  std::vector<std::uint8_t> out(flows.size());
  const auto n = static_cast<std::int64_t>(flows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = post::keep_flow(flows[i], mode);
  return out;
}

audit::AuditReport audit_lines(std::span<const std::string> lines, const audit::ResolvedColumns& cols,
                               const audit::ColumnMapping& mapping) {
  const int threads = omp_get_max_threads();
  std::vector<audit::AuditReport> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
  {
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const auto team = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t chunk = (lines.size() + team - 1) / team;
    const std::size_t lo = std::min(lines.size(), t * chunk);
    const std::size_t hi = std::min(lines.size(), lo + chunk);
    partial[t] = serial::audit_lines(lines.subspan(lo, hi - lo), cols, mapping);
  }
  audit::AuditReport out;
  for (const auto& p : partial) out.merge(p);
  return out;
}

}  // namespace flowlab::kernels

#include "flowlab/post_filter.hpp"

namespace flowlab::post {

std::optional<FilterMode> parse_filter_mode(std::string_view text) {
  if (text == "prose") return FilterMode::prose;
  if (text == "literal") return FilterMode::literal;
  return std::nullopt;
}

const char* to_string(FilterMode mode) {
  return mode == FilterMode::prose ? "prose" : "literal";
}

bool keep_flow(const LabeledFlow& flow, FilterMode mode) {
  const auto packets = flow.bidirectional_packets();
  const auto fin = flow[Feature::bidirectional_fin_packets];
  const auto rst = flow[Feature::bidirectional_rst_packets];
  if (mode == FilterMode::literal) return packets != 1 && (rst != 1 || fin != 1);
  return !(packets == 1 && (fin >= 1 || rst >= 1));
}

FilterResult filter_flows(std::vector<LabeledFlow> flows, FilterMode mode) {
  FilterResult out;
  out.flows.reserve(flows.size());
  for (auto& f : flows) {
    if (keep_flow(f, mode)) out.flows.push_back(std::move(f));
    else ++out.dropped;
  }
  return out;
}

}  // namespace flowlab::post

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "flowlab/flow_features.hpp"

namespace flowlab::post {

enum class FilterMode : std::uint8_t {
  // Drop single-packet flows that carry a FIN or RST.
  prose,
  // Keep a flow iff packets != 1 and (rst != 1 or fin != 1), read literally.
  literal,
};

std::optional<FilterMode> parse_filter_mode(std::string_view text);
const char* to_string(FilterMode mode);

bool keep_flow(const LabeledFlow& flow, FilterMode mode);

struct FilterResult {
  std::vector<LabeledFlow> flows;
  std::uint64_t dropped = 0;
};

// Order-preserving subsequence selection; flows are never modified.
FilterResult filter_flows(std::vector<LabeledFlow> flows, FilterMode mode = FilterMode::prose);

}  // namespace flowlab::post

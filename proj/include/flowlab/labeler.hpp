#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flowlab/flow_features.hpp"

namespace flowlab::label {

inline constexpr std::string_view kBenign = "BENIGN";

struct Ipv4Net {
  std::uint32_t addr = 0;
  std::uint8_t prefix = 32;

  bool contains(std::uint32_t ip) const {
    if (prefix == 0) return true;
    const std::uint32_t mask = prefix >= 32 ? 0xffffffffu : ~(0xffffffffu >> prefix);
    return (ip & mask) == (addr & mask);
  }
};

struct PortRange {
  std::uint16_t lo = 0;
  std::uint16_t hi = 65535;

  bool contains(std::uint16_t port) const { return port >= lo && port <= hi; }
};

// One attack profile. Empty attribute sets match anything.
struct LabelRule {
  std::string label;
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  std::vector<Ipv4Net> src_ips;
  std::vector<Ipv4Net> dst_ips;
  std::vector<PortRange> src_ports;
  std::vector<PortRange> dst_ports;
  std::optional<std::uint8_t> protocol;
  int priority = 0;
  std::size_t line = 0;  // where the rule starts in its file, 0 if built in code

  // Number of attributes that actually narrow the match. Full-range port sets
  // and /0 networks do not count.
  int specificity() const;
};

enum class TemporalMode : std::uint8_t {
  overlap,   // [first_seen, last_seen] intersects the rule window
  start_in,  // first_seen lies inside the rule window
};

struct LabelOptions {
  TemporalMode temporal = TemporalMode::overlap;
  // Labels that survive the zero-payload override (compared case-insensitively).
  std::vector<std::string> zpl_exempt = {"PortScan"};
};

// Attribute check in the given orientation only.
bool attributes_match(const FlowKey& key, const LabelRule& rule);
bool temporal_match(const FeatureVector& flow, const LabelRule& rule, TemporalMode mode);

// Attributes match as oriented or with source/destination swapped, and the
// flow passes temporal validation.
bool match_rule(const FeatureVector& flow, const LabelRule& rule,
                TemporalMode mode = TemporalMode::overlap);

struct LabelDecision {
  std::string label;
  int rule_index = -1;        // into the rule list, -1 when nothing matched
  bool ambiguous = false;     // an equal-priority rule with another label also matched
  bool zpl_override = false;  // a matched attack label was reset to BENIGN
};

// Rules must be in priority order (as returned by load_rules).
LabelDecision decide_label(const FeatureVector& flow, std::span<const LabelRule> rules,
                           const LabelOptions& options = {});
LabeledFlow label_flow(const FeatureVector& flow, std::span<const LabelRule> rules,
                       const LabelOptions& options = {});

class RuleError : public std::runtime_error {
 public:
  RuleError(const std::string& origin, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Parses the rule file grammar (see data/rules/README.md). Rules come back
// stable-sorted by priority, highest first. An empty file yields no rules.
std::vector<LabelRule> parse_rules(std::string_view text, const std::string& origin = "<rules>");
std::vector<LabelRule> load_rules(const std::string& path);

// Stable sort by descending priority.
void order_rules(std::vector<LabelRule>& rules);

// ISO-8601 date-time with mandatory zone ("Z" or +HH:MM) to epoch milliseconds.
std::optional<std::int64_t> parse_iso8601_ms(std::string_view text);

}  // namespace flowlab::label

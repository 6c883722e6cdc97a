#include "flowlab/labeler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "flowlab/packet.hpp"

namespace flowlab::label {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

template <typename Set, typename T>
bool set_contains(const Set& set, T value) {
  if (set.empty()) return true;
  return std::any_of(set.begin(), set.end(), [&](const auto& e) { return e.contains(value); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::optional<Ipv4Net> parse_net(std::string_view s) {
  Ipv4Net net;
  const auto slash = s.find('/');
  auto addr = parse_ipv4(s.substr(0, slash));
  if (!addr) return std::nullopt;
  net.addr = *addr;
  if (slash != std::string_view::npos) {
    unsigned prefix = 0;
    if (!parse_int(s.substr(slash + 1), prefix) || prefix > 32) return std::nullopt;
    net.prefix = static_cast<std::uint8_t>(prefix);
  }
  return net;
}

std::optional<PortRange> parse_port_range(std::string_view s) {
  const auto dash = s.find('-');
  unsigned lo = 0, hi = 0;
  if (dash == std::string_view::npos) {
    if (!parse_int(s, lo) || lo > 65535) return std::nullopt;
    hi = lo;
  } else if (!parse_int(trim(s.substr(0, dash)), lo) || !parse_int(trim(s.substr(dash + 1)), hi) ||
             lo > hi || hi > 65535) {
    return std::nullopt;
  }
  return PortRange{static_cast<std::uint16_t>(lo), static_cast<std::uint16_t>(hi)};
}

}  // namespace

int LabelRule::specificity() const {
  auto narrowing_nets = [](const std::vector<Ipv4Net>& v) {
    return !v.empty() && std::none_of(v.begin(), v.end(), [](const Ipv4Net& n) { return n.prefix == 0; });
  };
  auto narrowing_ports = [](const std::vector<PortRange>& v) {
    return !v.empty() && std::none_of(v.begin(), v.end(),
                                      [](const PortRange& r) { return r.lo == 0 && r.hi == 65535; });
  };
  return int{narrowing_nets(src_ips)} + int{narrowing_nets(dst_ips)} +
         int{narrowing_ports(src_ports)} + int{narrowing_ports(dst_ports)} +
         int{protocol.has_value()};
}

bool attributes_match(const FlowKey& key, const LabelRule& rule) {
  if (rule.protocol && *rule.protocol != key.protocol) return false;
  return set_contains(rule.src_ips, key.src_ip) && set_contains(rule.dst_ips, key.dst_ip) &&
         set_contains(rule.src_ports, key.src_port) && set_contains(rule.dst_ports, key.dst_port);
}

bool temporal_match(const FeatureVector& flow, const LabelRule& rule, TemporalMode mode) {
  if (mode == TemporalMode::start_in)
    return flow.first_seen_ms >= rule.window_start_ms && flow.first_seen_ms <= rule.window_end_ms;
  return flow.first_seen_ms <= rule.window_end_ms && flow.last_seen_ms >= rule.window_start_ms;
}

bool match_rule(const FeatureVector& flow, const LabelRule& rule, TemporalMode mode) {
  const bool attrs = attributes_match(flow.key, rule) || attributes_match(flow.key.reversed(), rule);
  return attrs && temporal_match(flow, rule, mode);
}

LabelDecision decide_label(const FeatureVector& flow, std::span<const LabelRule> rules,
                           const LabelOptions& options) {
  LabelDecision d;
  d.label = kBenign;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!match_rule(flow, rules[i], options.temporal)) continue;
    d.rule_index = static_cast<int>(i);
    d.label = rules[i].label;
    for (std::size_t j = i + 1; j < rules.size() && rules[j].priority == rules[i].priority; ++j) {
      if (rules[j].label != rules[i].label && match_rule(flow, rules[j], options.temporal)) {
        d.ambiguous = true;
        break;
      }
    }
    break;
  }

  if (d.rule_index >= 0 && flow.total_payload_bytes() == 0) {
    const bool exempt = std::any_of(options.zpl_exempt.begin(), options.zpl_exempt.end(),
                                    [&](const std::string& l) { return iequals(l, d.label); });
    if (!exempt && d.label != kBenign) {
      d.label = kBenign;
      d.zpl_override = true;
    }
  }
  return d;
}

LabeledFlow label_flow(const FeatureVector& flow, std::span<const LabelRule> rules,
                       const LabelOptions& options) {
  LabeledFlow out = flow;
  out.label = decide_label(flow, rules, options).label;
  return out;
}

RuleError::RuleError(const std::string& origin, std::size_t line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

void order_rules(std::vector<LabelRule>& rules) {
  std::stable_sort(rules.begin(), rules.end(),
                   [](const LabelRule& a, const LabelRule& b) { return a.priority > b.priority; });
}

std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
  // YYYY-MM-DD[T ]HH:MM[:SS[.fff]](Z|+HH[:MM]|-HH[:MM])
  auto digits = [&](std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
      out = out * 10 + (s[i] - '0');
    }
    return true;
  };
  int y, mo, d, h, mi, sec = 0, millis = 0;
  if (!digits(0, 4, y) || s.size() < 16 || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' ||
      !digits(8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !digits(11, 2, h) || s[13] != ':' ||
      !digits(14, 2, mi))
    return std::nullopt;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!digits(pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      int scale = 100;
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        millis += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
      if (pos == start) return std::nullopt;
    }
  }
  if (pos >= s.size()) return std::nullopt;  // zone is mandatory
  int offset_min = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    int oh, om = 0;
    if (!digits(pos + 1, 2, oh)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == ':') {
      if (!digits(pos + 1, 2, om)) return std::nullopt;
      pos += 3;
    } else if (pos + 2 <= s.size() && digits(pos, 2, om)) {
      pos += 2;
    }
    if (oh > 23 || om > 59) return std::nullopt;
    offset_min = sign * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t local_s = days * 86400 + h * 3600 + mi * 60 + sec;
  return (local_s - std::int64_t{offset_min} * 60) * 1000 + millis;
}

std::vector<LabelRule> parse_rules(std::string_view text, const std::string& origin) {
  std::vector<LabelRule> rules;
  std::optional<LabelRule> current;
  std::set<std::string> seen_keys;
  bool has_start = false, has_end = false, has_priority = false;

  auto finish = [&] {
    if (!current) return;
    if (current->label.empty()) throw RuleError(origin, current->line, "rule has no label");
    if (!has_start || !has_end)
      throw RuleError(origin, current->line, "rule '" + current->label + "' needs start and end");
    if (current->window_start_ms > current->window_end_ms)
      throw RuleError(origin, current->line,
                      "rule '" + current->label + "' has start after end");
    if (current->label.find(',') != std::string::npos)
      throw RuleError(origin, current->line, "labels may not contain commas");
    if (!has_priority) current->priority = current->specificity();
    rules.push_back(std::move(*current));
    current.reset();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line == "[rule]") {
      finish();
      current.emplace();
      current->line = line_no;
      seen_keys.clear();
      has_start = has_end = has_priority = false;
      continue;
    }
    if (line.front() == '[') throw RuleError(origin, line_no, "unknown section " + std::string(line));

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw RuleError(origin, line_no, "expected key = value");
    if (!current) throw RuleError(origin, line_no, "key outside of a [rule] section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen_keys.insert(key).second) throw RuleError(origin, line_no, "duplicate key '" + key + "'");
    if (value.empty()) throw RuleError(origin, line_no, "empty value for '" + key + "'");

    auto bad = [&](const std::string& what) {
      return RuleError(origin, line_no, "invalid " + key + ": " + what);
    };

    if (key == "label") {
      current->label = std::string(value);
    } else if (key == "start" || key == "end") {
      auto ms = parse_iso8601_ms(value);
      if (!ms) throw bad("expected ISO-8601 time with zone, got '" + std::string(value) + "'");
      (key == "start" ? current->window_start_ms : current->window_end_ms) = *ms;
      (key == "start" ? has_start : has_end) = true;
    } else if (key == "src_ips" || key == "dst_ips") {
      auto& target = key == "src_ips" ? current->src_ips : current->dst_ips;
      for (auto item : split_list(value)) {
        auto net = parse_net(item);
        if (!net) throw bad("'" + std::string(item) + "' is not an IPv4 address or CIDR block");
        target.push_back(*net);
      }
    } else if (key == "src_ports" || key == "dst_ports") {
      auto& target = key == "src_ports" ? current->src_ports : current->dst_ports;
      for (auto item : split_list(value)) {
        auto range = parse_port_range(item);
        if (!range) throw bad("'" + std::string(item) + "' is not a port or lo-hi range");
        target.push_back(*range);
      }
    } else if (key == "protocol") {
      if (iequals(value, "tcp") || value == "6") current->protocol = kProtoTcp;
      else if (iequals(value, "udp") || value == "17") current->protocol = kProtoUdp;
      else throw bad("expected tcp, udp, 6 or 17");
    } else if (key == "priority") {
      if (!parse_int(value, current->priority)) throw bad("expected an integer");
      has_priority = true;
    } else {
      throw RuleError(origin, line_no, "unknown key '" + key + "'");
    }
  }
  finish();
  order_rules(rules);
  return rules;
}

std::vector<LabelRule> load_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuleError(path, 0, "cannot open rule file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str(), path);
}

}  // namespace flowlab::label

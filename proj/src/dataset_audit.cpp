#include "flowlab/dataset_audit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flowlab/flow_csv.hpp"

namespace flowlab::audit {

namespace {

std::string normalize(std::string_view name) {
  std::string out;
  for (unsigned char c : name)
    if (!std::isspace(c) && c != '_') out += static_cast<char>(std::tolower(c));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

bool icontains(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return false;
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                        [](unsigned char x, unsigned char y) { return std::tolower(x) == std::tolower(y); });
  return it != hay.end();
}

enum class Cell { number, nan, inf };

Cell classify(std::string_view raw, double& value) {
  const auto s = trim(raw);
  if (s.empty()) return Cell::nan;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size()) return Cell::nan;
  if (std::isnan(value)) return Cell::nan;
  if (std::isinf(value)) return Cell::inf;
  return Cell::number;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& normalized,
                                       const std::vector<std::string>& aliases) {
  for (const auto& alias : aliases) {
    const auto want = normalize(alias);
    for (std::size_t i = 0; i < normalized.size(); ++i)
      if (normalized[i] == want) return i;
  }
  return std::nullopt;
}

std::string join_aliases(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " | ") + s;
  return out;
}

const std::vector<std::string> kCicIgnore = {
    "Flow ID", "Source IP", "Src IP", "Destination IP", "Dst IP", "Timestamp",
    "Label", "Attempted Category", "id"};

}  // namespace

std::vector<std::string> ColumnMapping::builtin_names() {
  return {"nfstream", "cicids2017", "wtmc2021", "crisis2022"};
}

ColumnMapping ColumnMapping::builtin(std::string_view profile) {
  ColumnMapping m;
  m.profile = std::string(profile);
  if (profile == "nfstream") {
    m.label = {"label"};
    m.fin = {"bidirectional_fin_packets"};
    m.rst = {"bidirectional_rst_packets"};
    m.ignore = {"id", "src_ip", "dst_ip", "src_mac", "src_oui", "dst_mac", "dst_oui", "label",
                "application_name", "application_category_name", "requested_server_name",
                "client_fingerprint", "server_fingerprint", "user_agent", "content_type"};
    m.sign_carrying = {"expiration_id"};
    return m;
  }
  if (profile == "cicids2017" || profile == "wtmc2021" || profile == "crisis2022") {
    m.label = {"Label"};
    m.fin = {"FIN Flag Count", "FIN Flag Cnt", "FIN Flags"};
    m.rst = {"RST Flag Count", "RST Flag Cnt", "RST Flags"};
    m.ignore = kCicIgnore;
    if (profile == "wtmc2021") m.excluded_label_substrings = {"Attempted"};
    return m;
  }
  throw AuditError("unknown column profile '" + std::string(profile) + "'");
}

ColumnMapping ColumnMapping::parse(std::string_view text, const std::string& origin) {
  ColumnMapping m;
  m.profile = "custom";
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw AuditError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(sv.substr(0, eq)));
    const auto value = trim(sv.substr(eq + 1));

    std::vector<std::string> items;
    std::size_t pos = 0;
    while (pos <= value.size()) {
      auto bar = value.find('|', pos);
      auto item = trim(value.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos));
      if (!item.empty()) items.emplace_back(item);
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }

    if (key == "profile") {
      if (items.size() != 1) throw AuditError(origin + ":" + std::to_string(line_no) + ": one profile name expected");
      m = builtin(items.front());
    } else if (key == "label") m.label = items;
    else if (key == "fin") m.fin = items;
    else if (key == "rst") m.rst = items;
    else if (key == "ignore") m.ignore = items;
    else if (key == "signed") m.sign_carrying = items;
    else if (key == "benign") m.benign_labels = items;
    else if (key == "exclude_label_containing") m.excluded_label_substrings = items;
    else throw AuditError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return m;
}

ColumnMapping ColumnMapping::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError("cannot open mapping file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

ResolvedColumns resolve_columns(const std::vector<std::string>& header, const ColumnMapping& mapping) {
  ResolvedColumns cols;
  cols.names.reserve(header.size());
  std::vector<std::string> normalized;
  for (const auto& h : header) {
    cols.names.emplace_back(trim(h));
    normalized.push_back(normalize(h));
  }

  auto require = [&](const std::vector<std::string>& aliases, const char* what) {
    auto idx = find_column(normalized, aliases);
    if (!idx)
      throw AuditError(std::string("cannot resolve mandatory ") + what + " column (tried: " +
                       join_aliases(aliases) + ")");
    return *idx;
  };
  cols.label = require(mapping.label, "label");
  cols.fin = require(mapping.fin, "FIN-count");
  cols.rst = require(mapping.rst, "RST-count");

  std::set<std::string> ignored, sign_carrying;
  for (const auto& a : mapping.ignore) ignored.insert(normalize(a));
  for (const auto& a : mapping.sign_carrying) sign_carrying.insert(normalize(a));
  cols.sign_carrying.resize(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    cols.sign_carrying[i] = sign_carrying.count(normalized[i]) > 0;
    if (i != cols.label && !ignored.count(normalized[i])) cols.features.push_back(i);
  }
  return cols;
}

void audit_row(const std::vector<std::string>& fields, const ResolvedColumns& cols,
               const ColumnMapping& mapping, AuditReport& r) {
  ++r.rows;
  const auto label = cols.label < fields.size() ? trim(fields[cols.label]) : std::string_view{};
  if (label.empty() || iequals(label, "nan")) {
    ++r.unlabeled_rows;
    return;
  }
  for (const auto& sub : mapping.excluded_label_substrings) {
    if (icontains(label, sub)) {
      ++r.excluded_rows;
      return;
    }
  }

  const bool benign = std::any_of(mapping.benign_labels.begin(), mapping.benign_labels.end(),
                                  [&](const std::string& b) { return iequals(b, label); });
  ++r.total_flows;
  ++(benign ? r.benign_flows : r.anomaly_flows);
  ++r.per_label[std::string(label)];

  for (std::size_t c : cols.features) {
    double v = 0;
    const auto kind = c < fields.size() ? classify(fields[c], v) : Cell::nan;
    if (kind == Cell::nan) {
      ++r.nan_cells;
      ++r.nan_by_column[cols.names[c]];
    } else if (kind == Cell::inf) {
      ++r.inf_cells;
      ++r.inf_by_column[cols.names[c]];
    } else if (v < 0 && !cols.sign_carrying[c]) {
      ++r.negative_cells;
      ++r.negative_by_column[cols.names[c]];
    }
  }

  auto census = [&](std::size_t col, FlagCensus& out) {
    double v = 0;
    if (col < fields.size() && classify(fields[col], v) == Cell::number && v > 2) {
      ++out.total;
      ++(benign ? out.benign : out.anomaly);
    }
  };
  census(cols.fin, r.fin_gt2);
  census(cols.rst, r.rst_gt2);
}

AuditReport audit(std::istream& in, const ColumnMapping& mapping, std::string name) {
  AuditReport report;
  report.name = std::move(name);
  std::string line;
  if (!std::getline(in, line)) throw AuditError("CSV has no header row");
  std::vector<std::string> fields;
  csv::split_line(line, fields);
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  const auto cols = resolve_columns(fields, mapping);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    csv::split_line(line, fields);
    audit_row(fields, cols, mapping, report);
  }
  return report;
}

AuditReport audit_file(const std::string& path, const ColumnMapping& mapping, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError("cannot open " + path);
  return audit(in, mapping, name.empty() ? path : std::move(name));
}

void AuditReport::merge(const AuditReport& o) {
  rows += o.rows;
  total_flows += o.total_flows;
  benign_flows += o.benign_flows;
  anomaly_flows += o.anomaly_flows;
  unlabeled_rows += o.unlabeled_rows;
  excluded_rows += o.excluded_rows;
  for (const auto& [k, v] : o.per_label) per_label[k] += v;
  nan_cells += o.nan_cells;
  for (const auto& [k, v] : o.nan_by_column) nan_by_column[k] += v;
  inf_cells += o.inf_cells;
  for (const auto& [k, v] : o.inf_by_column) inf_by_column[k] += v;
  negative_cells += o.negative_cells;
  for (const auto& [k, v] : o.negative_by_column) negative_by_column[k] += v;
  for (auto [mine, theirs] : {std::pair{&fin_gt2, &o.fin_gt2}, std::pair{&rst_gt2, &o.rst_gt2}}) {
    mine->total += theirs->total;
    mine->benign += theirs->benign;
    mine->anomaly += theirs->anomaly;
  }
}

std::string AuditReport::to_json() const {
  auto census = [](const FlagCensus& c) {
    return nlohmann::json{{"total", c.total}, {"benign", c.benign}, {"anomaly", c.anomaly}};
  };
  nlohmann::json j{
      {"name", name},
      {"rows", rows},
      {"total_flows", total_flows},
      {"benign_flows", benign_flows},
      {"anomaly_flows", anomaly_flows},
      {"unlabeled_rows", unlabeled_rows},
      {"excluded_rows", excluded_rows},
      {"per_label", per_label},
      {"nan_cells", {{"count", nan_cells}, {"by_column", nan_by_column}}},
      {"inf_cells", {{"count", inf_cells}, {"by_column", inf_by_column}}},
      {"negative_cells", {{"count", negative_cells}, {"by_column", negative_by_column}}},
      {"fin_gt2", census(fin_gt2)},
      {"rst_gt2", census(rst_gt2)},
  };
  return j.dump(2) + "\n";
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  os << "dataset: " << name << "\n"
     << "  flows            " << total_flows << " (benign " << benign_flows << ", anomaly "
     << anomaly_flows << ")\n";
  if (unlabeled_rows) os << "  unlabeled rows   " << unlabeled_rows << "\n";
  if (excluded_rows) os << "  excluded rows    " << excluded_rows << "\n";
  os << "  NaN cells        " << nan_cells << "\n";
  for (const auto& [c, n] : nan_by_column) os << "    " << c << ": " << n << "\n";
  if (inf_cells) {
    os << "  Inf cells        " << inf_cells << "\n";
    for (const auto& [c, n] : inf_by_column) os << "    " << c << ": " << n << "\n";
  }
  os << "  negative cells   " << negative_cells << "\n";
  for (const auto& [c, n] : negative_by_column) os << "    " << c << ": " << n << "\n";
  os << "  FIN > 2          " << fin_gt2.total << " (benign " << fin_gt2.benign << ", anomaly "
     << fin_gt2.anomaly << ")\n"
     << "  RST > 2          " << rst_gt2.total << " (benign " << rst_gt2.benign << ", anomaly "
     << rst_gt2.anomaly << ")\n"
     << "  labels\n";
  for (const auto& [l, n] : per_label) os << "    " << l << ": " << n << "\n";
  return os.str();
}

ComparisonTable compare(std::span<const AuditReport> reports) {
  if (reports.size() < 2) throw AuditError("comparison needs at least two reports");
  ComparisonTable t;
  for (const auto& r : reports) t.datasets.push_back(r.name);

  auto add = [&](std::string metric, auto getter) {
    ComparisonTable::Row row{std::move(metric), {}};
    for (const auto& r : reports) row.values.push_back(getter(r));
    t.rows.push_back(std::move(row));
  };
  using V = std::optional<std::uint64_t>;
  add("total", [](const AuditReport& r) -> V { return r.total_flows; });
  add("benign", [](const AuditReport& r) -> V { return r.benign_flows; });
  add("anomaly", [](const AuditReport& r) -> V { return r.anomaly_flows; });
  add("nan_cells", [](const AuditReport& r) -> V { return r.nan_cells; });
  add("negative_cells", [](const AuditReport& r) -> V { return r.negative_cells; });
  add("fin_gt2.total", [](const AuditReport& r) -> V { return r.fin_gt2.total; });
  add("fin_gt2.benign", [](const AuditReport& r) -> V { return r.fin_gt2.benign; });
  add("fin_gt2.anomaly", [](const AuditReport& r) -> V { return r.fin_gt2.anomaly; });
  add("rst_gt2.total", [](const AuditReport& r) -> V { return r.rst_gt2.total; });
  add("rst_gt2.benign", [](const AuditReport& r) -> V { return r.rst_gt2.benign; });
  add("rst_gt2.anomaly", [](const AuditReport& r) -> V { return r.rst_gt2.anomaly; });

  std::set<std::string> labels;
  for (const auto& r : reports)
    for (const auto& [l, n] : r.per_label) labels.insert(l);
  for (const auto& l : labels) {
    add("label:" + l, [&](const AuditReport& r) -> V {
      auto it = r.per_label.find(l);
      return it == r.per_label.end() ? V{} : V{it->second};
    });
  }
  return t;
}

std::vector<std::vector<std::optional<std::int64_t>>> ComparisonTable::differences() const {
  std::vector<std::vector<std::optional<std::int64_t>>> out;
  for (const auto& row : rows) {
    std::vector<std::optional<std::int64_t>> diffs;
    for (const auto& v : row.values) {
      if (v && row.values.front())
        diffs.push_back(static_cast<std::int64_t>(*v) - static_cast<std::int64_t>(*row.values.front()));
      else
        diffs.emplace_back();
    }
    out.push_back(std::move(diffs));
  }
  return out;
}

std::string ComparisonTable::to_text() const {
  std::size_t metric_w = 6;
  for (const auto& r : rows) metric_w = std::max(metric_w, r.metric.size());
  std::vector<std::size_t> widths;
  for (const auto& d : datasets) widths.push_back(std::max<std::size_t>(d.size(), 10));

  std::ostringstream os;
  auto pad_left = [&](const std::string& s, std::size_t w) {
    os << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
  };
  os << "metric" << std::string(metric_w - 6, ' ');
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    os << "  ";
    pad_left(datasets[i], widths[i]);
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.metric << std::string(metric_w - r.metric.size(), ' ');
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      os << "  ";
      pad_left(r.values[i] ? std::to_string(*r.values[i]) : "--", widths[i]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace flowlab::audit

#include "flowlab/flow_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flowlab/packet.hpp"

namespace flowlab::csv {

namespace {

constexpr std::size_t kKeyColumns = 5;
constexpr std::size_t kFinalColumns = kKeyColumns + kFeatureCount + 4;

template <typename Int>
Int parse_int_field(const std::string& s, std::size_t line, const std::string& column) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw CsvError("line " + std::to_string(line) + ": bad integer in " + column + ": '" + s + "'");
  return v;
}

double parse_real_field(const std::string& s, std::size_t line, const std::string& column) {
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    throw CsvError("line " + std::to_string(line) + ": bad number in " + column + ": '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> column_names(Schema schema) {
  std::vector<std::string> cols{"src_ip", "src_port", "dst_ip", "dst_port", "protocol"};
  for (const auto& f : feature_table()) cols.emplace_back(f.name);
  cols.insert(cols.end(), {"first_seen_ms", "last_seen_ms", "expiration_id", "label"});
  if (schema == Schema::working) cols.insert(cols.end(), {"src2dst_payload_bytes", "dst2src_payload_bytes"});
  return cols;
}

std::string header_line(Schema schema) {
  std::string out;
  for (const auto& c : column_names(schema)) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string format_real(double value) {
  if (!std::isfinite(value)) throw std::domain_error("refusing to export a non-finite value");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
  if (ec != std::errc{}) throw std::domain_error("value out of range for export");
  std::string s(buf, end);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string format_row(const LabeledFlow& flow, Schema schema) {
  if (flow.label.find_first_of(",\"\r\n") != std::string::npos)
    throw CsvError("label cannot be exported unquoted: " + flow.label);
  std::string row;
  row.reserve(512);
  row += format_ipv4(flow.key.src_ip);
  row += ',';
  row += std::to_string(flow.key.src_port);
  row += ',';
  row += format_ipv4(flow.key.dst_ip);
  row += ',';
  row += std::to_string(flow.key.dst_port);
  row += ',';
  row += std::to_string(flow.key.protocol);
  const auto& table = feature_table();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    row += ',';
    const double v = flow.values[i];
    if (table[i].integral) {
      if (!std::isfinite(v)) throw std::domain_error("refusing to export a non-finite value");
      row += std::to_string(static_cast<long long>(std::llround(v)));
    } else {
      row += format_real(v);
    }
  }
  row += ',';
  row += std::to_string(flow.first_seen_ms);
  row += ',';
  row += std::to_string(flow.last_seen_ms);
  row += ',';
  row += std::to_string(flow.expiration_id);
  row += ',';
  row += flow.label;
  if (schema == Schema::working) {
    row += ',';
    row += std::to_string(flow.src2dst_payload_bytes);
    row += ',';
    row += std::to_string(flow.dst2src_payload_bytes);
  }
  return row;
}

void write_flows(std::ostream& out, std::span<const LabeledFlow> flows, Schema schema) {
  out << header_line(schema) << '\n';
  for (const auto& f : flows) out << format_row(f, schema) << '\n';
}

void export_csv(std::span<const LabeledFlow> flows, const std::string& path, Schema schema) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CsvError("cannot write " + path);
  write_flows(out, flows, schema);
  out.flush();
  if (!out) throw CsvError("write failed: " + path);
}

void split_line(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
}

std::vector<LabeledFlow> read_flows(std::istream& in, bool* has_payload) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("flow file is empty (no header)");
  std::vector<std::string> fields;
  split_line(line, fields);

  const auto final_cols = column_names(Schema::final_export);
  const auto working_cols = column_names(Schema::working);
  bool payload = false;
  if (fields == working_cols) payload = true;
  else if (fields != final_cols) throw CsvError("header does not match the flow schema");
  if (has_payload) *has_payload = payload;

  std::vector<LabeledFlow> flows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    split_line(line, fields);
    if (fields.size() != (payload ? working_cols.size() : final_cols.size()))
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(payload ? working_cols.size() : final_cols.size()) + " fields");
    LabeledFlow f;
    auto src = parse_ipv4(fields[0]);
    auto dst = parse_ipv4(fields[2]);
    if (!src || !dst) throw CsvError("line " + std::to_string(line_no) + ": bad IPv4 address");
    f.key.src_ip = *src;
    f.key.dst_ip = *dst;
    f.key.src_port = parse_int_field<std::uint16_t>(fields[1], line_no, "src_port");
    f.key.dst_port = parse_int_field<std::uint16_t>(fields[3], line_no, "dst_port");
    f.key.protocol = parse_int_field<std::uint8_t>(fields[4], line_no, "protocol");
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      f.values[i] = parse_real_field(fields[kKeyColumns + i], line_no, final_cols[kKeyColumns + i]);
    std::size_t c = kKeyColumns + kFeatureCount;
    f.first_seen_ms = parse_int_field<std::int64_t>(fields[c], line_no, "first_seen_ms");
    f.last_seen_ms = parse_int_field<std::int64_t>(fields[c + 1], line_no, "last_seen_ms");
    f.expiration_id = parse_int_field<int>(fields[c + 2], line_no, "expiration_id");
    f.label = fields[c + 3];
    if (payload) {
      f.src2dst_payload_bytes = parse_int_field<std::uint64_t>(fields[kFinalColumns], line_no, "src2dst_payload_bytes");
      f.dst2src_payload_bytes = parse_int_field<std::uint64_t>(fields[kFinalColumns + 1], line_no, "dst2src_payload_bytes");
    }
    flows.push_back(std::move(f));
  }
  return flows;
}

std::vector<LabeledFlow> read_flows(const std::string& path, bool* has_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path);
  return read_flows(in, has_payload);
}

}  // namespace flowlab::csv

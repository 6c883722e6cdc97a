#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flowlab/flow_features.hpp"

namespace flowlab::csv {

enum class Schema {
  // five-tuple, 41 features, first_seen_ms, last_seen_ms, expiration_id, label
  final_export,
  // final_export plus src2dst_payload_bytes, dst2src_payload_bytes; passed
  // between the meter, label and filter stages so ZPL handling still works
  working,
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> column_names(Schema schema);
std::string header_line(Schema schema);

// Fixed notation, at most 6 decimals, trailing zeros trimmed. Throws on
// non-finite input.
std::string format_real(double value);

std::string format_row(const LabeledFlow& flow, Schema schema);
void write_flows(std::ostream& out, std::span<const LabeledFlow> flows, Schema schema);
void export_csv(std::span<const LabeledFlow> flows, const std::string& path,
                Schema schema = Schema::final_export);

// Reads either schema. `has_payload` reports whether payload columns were present
// (they read as zero otherwise).
std::vector<LabeledFlow> read_flows(const std::string& path, bool* has_payload = nullptr);
std::vector<LabeledFlow> read_flows(std::istream& in, bool* has_payload = nullptr);

// RFC 4180 field splitting (quoted fields, doubled quotes). Strips a trailing '\r'.
void split_line(std::string_view line, std::vector<std::string>& fields);

}  // namespace flowlab::csv

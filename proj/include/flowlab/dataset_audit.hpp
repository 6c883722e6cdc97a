#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowlab::audit {

class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How to find the census columns in a flow CSV. Column names are compared
// after lower-casing and dropping spaces and underscores, so "Src IP",
// " Source IP" and "src_ip" only need one alias each.
struct ColumnMapping {
  std::string profile;
  std::vector<std::string> label;
  std::vector<std::string> fin;
  std::vector<std::string> rst;
  std::vector<std::string> ignore;       // identifier columns, not census features
  std::vector<std::string> sign_carrying;  // negatives are meaningful here
  std::vector<std::string> benign_labels{"BENIGN"};
  std::vector<std::string> excluded_label_substrings;  // rows left out of every count

  // "nfstream" (this toolkit and NFStream exports), "cicids2017", "wtmc2021",
  // "crisis2022". Throws AuditError for anything else.
  static ColumnMapping builtin(std::string_view profile);
  static std::vector<std::string> builtin_names();
  // Mapping file: `key = alias | alias` lines; `profile = name` seeds from a
  // built-in profile and later keys replace that profile's lists.
  static ColumnMapping parse(std::string_view text, const std::string& origin = "<mapping>");
  static ColumnMapping load(const std::string& path);
};

struct FlagCensus {
  std::uint64_t total = 0;
  std::uint64_t benign = 0;
  std::uint64_t anomaly = 0;
};

struct AuditReport {
  std::string name;
  std::uint64_t rows = 0;  // data rows read
  std::uint64_t total_flows = 0;
  std::uint64_t benign_flows = 0;
  std::uint64_t anomaly_flows = 0;
  std::uint64_t unlabeled_rows = 0;
  std::uint64_t excluded_rows = 0;
  std::map<std::string, std::uint64_t> per_label;
  std::uint64_t nan_cells = 0;
  std::map<std::string, std::uint64_t> nan_by_column;
  std::uint64_t inf_cells = 0;
  std::map<std::string, std::uint64_t> inf_by_column;
  std::uint64_t negative_cells = 0;
  std::map<std::string, std::uint64_t> negative_by_column;
  FlagCensus fin_gt2;
  FlagCensus rst_gt2;

  // Adds another partial census over disjoint rows.
  void merge(const AuditReport& other);
  std::string to_json() const;
  std::string to_text() const;
};

struct ResolvedColumns {
  std::vector<std::string> names;
  std::size_t label = 0;
  std::size_t fin = 0;
  std::size_t rst = 0;
  std::vector<std::size_t> features;  // census columns
  std::vector<bool> sign_carrying;    // indexed by column
};

// Throws AuditError naming the mandatory column that could not be found.
ResolvedColumns resolve_columns(const std::vector<std::string>& header, const ColumnMapping& mapping);

void audit_row(const std::vector<std::string>& fields, const ResolvedColumns& cols,
               const ColumnMapping& mapping, AuditReport& report);

// One pass over a CSV with a header row.
AuditReport audit(std::istream& in, const ColumnMapping& mapping, std::string name = {});
AuditReport audit_file(const std::string& path, const ColumnMapping& mapping, std::string name = {});

// Cross-dataset comparison, one column per report. Cells are empty where a
// label does not occur in that dataset.
struct ComparisonTable {
  std::vector<std::string> datasets;
  struct Row {
    std::string metric;
    std::vector<std::optional<std::uint64_t>> values;
  };
  std::vector<Row> rows;

  // Signed difference of each dataset against the first; empty where either side is.
  std::vector<std::vector<std::optional<std::int64_t>>> differences() const;
  std::string to_text() const;
};

// Throws AuditError with fewer than two reports.
ComparisonTable compare(std::span<const AuditReport> reports);

}  // namespace flowlab::audit

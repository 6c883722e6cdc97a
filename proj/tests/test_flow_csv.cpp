#include <doctest.h>

#include <fstream>
#include <sstream>

#include "flowlab/dataset_audit.hpp"
#include "flowlab/flow_csv.hpp"
#include "flowlab/flow_engine.hpp"
#include "oracle.hpp"

using namespace flowlab;
using namespace flowlab::csv;
using oracle::ip;

#ifndef FLOWLAB_FIXTURES
#error "FLOWLAB_FIXTURES must point at tests/fixtures"
#endif

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<LabeledFlow> sample_flows() {
  oracle::TraceGen gen(4242);
  std::vector<LabeledFlow> out;
  for (const auto& r : meter_packets(oracle::ethernet_frames(gen.trace({})), {}, 1))
    out.push_back(finalize(r));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = i % 3 ? "BENIGN" : "DoS Hulk";
  return out;
}

}  // namespace

TEST_CASE("export header matches the committed fixture") {
  const auto golden = slurp(std::string(FLOWLAB_FIXTURES) + "/flow_header.csv");
  CHECK(header_line(Schema::final_export) + "\n" == golden);
  CHECK(column_names(Schema::final_export).size() == 50);
  CHECK(column_names(Schema::working).size() == 52);
}

TEST_CASE("numbers are rendered without noise") {
  CHECK(format_real(0) == "0");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(42) == "42");
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(1.0 / 3.0) == "0.333333");
  CHECK(format_real(2.0 / 3.0) == "0.666667");
  CHECK(format_real(1e-9) == "0");
  CHECK(format_real(123456789012.25) == "123456789012.25");
  CHECK_THROWS(format_real(std::nan("")));
  CHECK_THROWS(format_real(HUGE_VAL));
}

TEST_CASE("empty flow list gives a header-only file") {
  oracle::TempDir dir;
  export_csv({}, dir.file("e.csv"));
  CHECK(slurp(dir.file("e.csv")) == header_line(Schema::final_export) + "\n");
}

TEST_CASE("one UDP flow") {
  auto recs = meter_packets({oracle::ethernet_frame(oracle::udp(1500, ip(10, 0, 0, 1), 53, ip(10, 0, 0, 2), 5353, 30))},
                            {}, 1);
  auto f = finalize(recs.at(0));
  f.label = "BENIGN";
  const auto row = format_row(f, Schema::final_export);
  std::vector<std::string> fields;
  split_line(row, fields);
  REQUIRE(fields.size() == 50);
  CHECK(fields[0] == "10.0.0.1");
  CHECK(fields[1] == "53");
  CHECK(fields[2] == "10.0.0.2");
  CHECK(fields[3] == "5353");
  CHECK(fields[4] == "17");
  CHECK(fields[5] == "1");
  CHECK(fields[7] == "58");
  for (std::size_t i = 34; i <= 41; ++i) CHECK(fields[i] == "0");  // fin..ece
  CHECK(fields[46] == "1500");
  CHECK(fields[47] == "1500");
  CHECK(fields[48] == "0");
  CHECK(fields[49] == "BENIGN");
}

TEST_CASE("labels that would need quoting are refused") {
  LabeledFlow f;
  f.label = "Web Attack, XSS";
  CHECK_THROWS_AS(format_row(f, Schema::final_export), CsvError);
  f.label = "Web Attack \xE2\x80\x93 XSS";  // non-ASCII is fine
  CHECK_NOTHROW(format_row(f, Schema::final_export));
}

TEST_CASE("read_flows round-trips both schemas") {
  oracle::TempDir dir;
  const auto flows = sample_flows();
  REQUIRE(!flows.empty());
  for (auto schema : {Schema::final_export, Schema::working}) {
    export_csv(flows, dir.file("f.csv"), schema);
    bool has_payload = true;
    const auto back = read_flows(dir.file("f.csv"), &has_payload);
    CHECK(has_payload == (schema == Schema::working));
    REQUIRE(back.size() == flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
      CHECK(back[i].key == flows[i].key);
      CHECK(back[i].label == flows[i].label);
      CHECK(back[i].expiration_id == flows[i].expiration_id);
      CHECK(back[i].first_seen_ms == flows[i].first_seen_ms);
      for (std::size_t k = 0; k < kFeatureCount; ++k) CHECK(back[i].values[k] == doctest::Approx(flows[i].values[k]).epsilon(1e-6));
      if (schema == Schema::working) CHECK(back[i].total_payload_bytes() == flows[i].total_payload_bytes());
    }
    // Writing what was read reproduces the file byte for byte.
    export_csv(back, dir.file("g.csv"), schema);
    CHECK(slurp(dir.file("f.csv")) == slurp(dir.file("g.csv")));
  }
}

TEST_CASE("read_flows rejects foreign or damaged files") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_flows(empty), CsvError);
  std::istringstream foreign("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_flows(foreign), CsvError);
  std::istringstream short_row(header_line(Schema::final_export) + "\n1.2.3.4,1\n");
  CHECK_THROWS_AS(read_flows(short_row), CsvError);
  CHECK_THROWS_AS(read_flows("/nonexistent/flows.csv"), CsvError);
}

TEST_CASE("split_line handles quoting") {
  std::vector<std::string> f;
  split_line(R"(a,"b,c","d""e",,f)" "\r", f);
  CHECK(f == std::vector<std::string>{"a", "b,c", "d\"e", "", "f"});
}

TEST_CASE("export then audit reproduces the in-memory totals") {
  oracle::TempDir dir;
  const auto flows = sample_flows();
  export_csv(flows, dir.file("f.csv"));
  const auto report = audit::audit_file(dir.file("f.csv"), audit::ColumnMapping::builtin("nfstream"));
  std::uint64_t benign = 0, fin_gt2 = 0;
  for (const auto& f : flows) {
    benign += f.label == "BENIGN";
    fin_gt2 += f[Feature::bidirectional_fin_packets] > 2;
  }
  CHECK(report.total_flows == flows.size());
  CHECK(report.benign_flows == benign);
  CHECK(report.anomaly_flows == flows.size() - benign);
  CHECK(report.fin_gt2.total == fin_gt2);
  CHECK(report.nan_cells == 0);
  CHECK(report.negative_cells == 0);
}

TEST_CASE("classifier view of the export: protocol plus 41 statistics") {
  // Dropping addresses, ports, timestamps, expiration id and label leaves
  // the feature matrix an evaluation harness trains on.
  std::size_t kept = 0;
  for (const auto& c : column_names(Schema::final_export)) {
    if (c == "src_ip" || c == "dst_ip" || c == "src_port" || c == "dst_port" || c == "first_seen_ms" ||
        c == "last_seen_ms" || c == "expiration_id" || c == "label")
      continue;
    ++kept;
  }
  CHECK(kept == 42);
  const auto cols = audit::resolve_columns(column_names(Schema::final_export), audit::ColumnMapping::builtin("nfstream"));
  CHECK(cols.names[cols.label] == "label");
  CHECK(cols.names[cols.fin] == "bidirectional_fin_packets");
}

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "flowlab/dataset_audit.hpp"
#include "oracle.hpp"

using namespace flowlab::audit;

namespace {

AuditReport run(const std::string& csv, const ColumnMapping& m = ColumnMapping::builtin("cicids2017"),
                const std::string& name = "t") {
  std::istringstream in(csv);
  return audit(in, m, name);
}

}  // namespace

TEST_CASE("audit examples") {
  SUBCASE("label split") {
    auto r = run(" Flow Bytes/s, FIN Flag Count, RST Flag Count, Label\n1,0,0,BENIGN\n2,0,0,DDoS\n3,0,0,DDoS\n");
    CHECK(r.total_flows == 3);
    CHECK(r.benign_flows == 1);
    CHECK(r.anomaly_flows == 2);
    CHECK(r.per_label.at("DDoS") == 2);
  }
  SUBCASE("empty numeric cell") {
    auto r = run("Flow Bytes/s,FIN Flag Count,RST Flag Count,Label\n,0,0,BENIGN\n5,0,0,BENIGN\n");
    CHECK(r.nan_cells == 1);
    CHECK(r.nan_by_column.at("Flow Bytes/s") == 1);
  }
  SUBCASE("FIN above two") {
    auto r = run("FIN Flag Count,RST Flag Count,Label\n3,0,BENIGN\n2,0,BENIGN\n4,3,Bot\n");
    CHECK(r.fin_gt2.total == 2);
    CHECK(r.fin_gt2.benign == 1);
    CHECK(r.fin_gt2.anomaly == 1);
    CHECK(r.rst_gt2.total == 1);
    CHECK(r.rst_gt2.anomaly == 1);
  }
}

TEST_CASE("cell classification") {
  auto r = run("Flow Bytes/s,Flow IAT Min,FIN Flag Count,RST Flag Count,Label\n"
               "NaN,-1,0,0,BENIGN\n"
               "Infinity,-5,0,0,BENIGN\n"
               "abc,2,0,0,BENIGN\n"
               "inf,0,0,0,BENIGN\n");
  CHECK(r.nan_cells == 2);
  CHECK(r.inf_cells == 2);
  CHECK(r.negative_cells == 2);
  CHECK(r.negative_by_column.at("Flow IAT Min") == 2);
}

TEST_CASE("sign-carrying and identifier columns are left out of the census") {
  auto r = run("src_ip,expiration_id,src2dst_packets,bidirectional_fin_packets,bidirectional_rst_packets,label\n"
               "10.0.0.1,-1,3,1,0,BENIGN\n",
               ColumnMapping::builtin("nfstream"));
  CHECK(r.negative_cells == 0);
  CHECK(r.nan_cells == 0);
}

TEST_CASE("unlabeled and excluded rows") {
  const std::string csv = "FIN Flag Count,RST Flag Count,Label\n9,0,\n9,0,DoS Hulk - Attempted\n9,0,BENIGN\n";
  auto cic = run(csv);
  CHECK(cic.unlabeled_rows == 1);
  CHECK(cic.total_flows == 2);
  auto wtmc = run(csv, ColumnMapping::builtin("wtmc2021"));
  CHECK(wtmc.excluded_rows == 1);
  CHECK(wtmc.total_flows == 1);
  CHECK(wtmc.fin_gt2.total == 1);
  CHECK(wtmc.rows == 3);
}

TEST_CASE("column naming conventions resolve to the same columns") {
  const auto m = ColumnMapping::builtin("crisis2022");
  for (const std::string header : {"FIN Flag Count,RST Flag Count,Label", "FIN Flag Cnt,RST Flag Cnt,Label",
                                   " fin_flag_count , rst flag count , label"}) {
    auto r = run(header + "\n3,3,BENIGN\n", m);
    CHECK(r.fin_gt2.total == 1);
    CHECK(r.rst_gt2.total == 1);
  }
  auto bom = run("\xEF\xBB\xBF" "FIN Flag Count,RST Flag Count,Label\n0,0,X\n");
  CHECK(bom.anomaly_flows == 1);
}

TEST_CASE("missing mandatory columns name themselves") {
  try {
    run("FIN Flag Count,Label\n1,BENIGN\n");
    FAIL("expected an error");
  } catch (const AuditError& e) {
    CHECK(std::string(e.what()).find("RST") != std::string::npos);
  }
  CHECK_THROWS_AS(run(""), AuditError);
  CHECK_THROWS_AS(ColumnMapping::builtin("argus"), AuditError);
  CHECK_THROWS_AS(audit_file("/nonexistent.csv", ColumnMapping::builtin("nfstream")), AuditError);
}

TEST_CASE("mapping files") {
  auto m = ColumnMapping::parse("profile = cicids2017\nlabel = Class | Tag  # comment\nbenign = Normal\nsigned = Delta\n");
  CHECK(m.label == std::vector<std::string>{"Class", "Tag"});
  CHECK(m.fin.size() == 3);
  auto r = run("Delta,FIN Flags,RST Flags,Tag\n-3,0,0,Normal\n-3,0,0,Evil\n", m);
  CHECK(r.benign_flows == 1);
  CHECK(r.negative_cells == 0);
  CHECK_THROWS_AS(ColumnMapping::parse("colour = red\n"), AuditError);
  CHECK_THROWS_AS(ColumnMapping::parse("just text\n"), AuditError);
}

TEST_CASE("reports are invariant to row order and merge like a single pass") {
  oracle::TraceGen gen(12);
  const char* labels[] = {"BENIGN", "DDoS", "PortScan", "", "Bot"};
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> rows;
    for (int i = 0; i < 80; ++i) {
      std::string cell = gen.chance(0.1) ? "" : std::to_string(gen.uniform(-3, 5));
      rows.push_back(cell + "," + std::to_string(gen.uniform(0, 4)) + "," + std::to_string(gen.uniform(0, 4)) + "," +
                     labels[gen.uniform(0, 4)]);
    }
    const std::string header = "Flow IAT Min,FIN Flag Count,RST Flag Count,Label\n";
    auto join = [&](std::size_t from, std::size_t to) {
      std::string s = header;
      for (std::size_t i = from; i < to; ++i) s += rows[i] + "\n";
      return s;
    };
    const auto whole = run(join(0, rows.size()));
    std::shuffle(rows.begin(), rows.end(), gen.rng());
    const auto shuffled = run(join(0, rows.size()));
    CHECK(whole.to_json() == shuffled.to_json());

    auto part = run(join(0, 30));
    part.merge(run(join(30, rows.size())));
    CHECK(part.to_json() == shuffled.to_json());

    std::uint64_t per_label = 0;
    for (const auto& [l, n] : whole.per_label) per_label += n;
    CHECK(per_label == whole.benign_flows + whole.anomaly_flows);
    CHECK(whole.benign_flows + whole.anomaly_flows == whole.total_flows);
    CHECK(whole.fin_gt2.total == whole.fin_gt2.benign + whole.fin_gt2.anomaly);
    CHECK(whole.rst_gt2.total == whole.rst_gt2.benign + whole.rst_gt2.anomaly);
  }
}

TEST_CASE("structured report") {
  auto r = run("FIN Flag Count,RST Flag Count,Label\n3,0,BENIGN\n", ColumnMapping::builtin("cicids2017"), "Mon");
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["name"] == "Mon");
  CHECK(j["total_flows"] == 1);
  CHECK(j["fin_gt2"]["benign"] == 1);
  CHECK(j["nan_cells"]["count"] == 0);
  CHECK(r.to_text().find("FIN > 2") != std::string::npos);
}

TEST_CASE("compare") {
  const std::string header = "FIN Flag Count,RST Flag Count,Label\n";
  const auto a = run(header + "3,0,BENIGN\n0,0,DDoS\n", ColumnMapping::builtin("cicids2017"), "A");
  SUBCASE("identical reports") {
    std::vector<AuditReport> v{a, a};
    const auto t = compare(v);
    for (const auto& row : t.differences()) CHECK(row[1] == 0);
  }
  SUBCASE("disjoint labels") {
    const auto b = run(header + "0,0,PortScan\n", ColumnMapping::builtin("cicids2017"), "B");
    std::vector<AuditReport> v{a, b};
    const auto t = compare(v);
    std::vector<std::string> metrics;
    for (const auto& row : t.rows) metrics.push_back(row.metric);
    for (const char* want : {"label:BENIGN", "label:DDoS", "label:PortScan"})
      CHECK(std::find(metrics.begin(), metrics.end(), want) != metrics.end());
    const auto& scan = *std::find_if(t.rows.begin(), t.rows.end(), [](auto& r) { return r.metric == "label:PortScan"; });
    CHECK_FALSE(scan.values[0].has_value());
    CHECK(scan.values[1] == 1u);
    CHECK(t.to_text().find("--") != std::string::npos);
  }
  SUBCASE("needs two reports") {
    std::vector<AuditReport> v{a};
    CHECK_THROWS_AS(compare(v), AuditError);
  }
}

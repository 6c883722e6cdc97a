#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flowlab/flow_csv.hpp"
#include "flowlab/pipeline.hpp"
#include "oracle.hpp"

using namespace flowlab;
using oracle::ip;
namespace fs = std::filesystem;

namespace {

const std::uint32_t A = ip(192, 168, 10, 5), B = ip(192, 168, 10, 50), C = ip(172, 16, 0, 1);

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& csv_path) {
  const auto s = slurp(csv_path);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) - 1;
}

// 10 packets in 2 flows: a TCP exchange and a DNS query/response. One frame
// is duplicated and the DNS pair is captured out of order.
std::vector<RawPacket> ten_packets() {
  const std::int64_t t0 = 1'499'170'000'000;
  std::vector<oracle::Pkt> p{
      oracle::tcp(t0, A, 40000, B, 80, oracle::SYN),
      oracle::tcp(t0 + 1, B, 80, A, 40000, oracle::SYN | oracle::ACK),
      oracle::tcp(t0 + 2, A, 40000, B, 80, oracle::ACK),
      oracle::tcp(t0 + 3, A, 40000, B, 80, oracle::PSH | oracle::ACK, 300),
      oracle::tcp(t0 + 4, B, 80, A, 40000, oracle::PSH | oracle::ACK, 1200),
      oracle::udp(t0 + 6, A, 5353, ip(8, 8, 8, 8), 53, 30),
      oracle::udp(t0 + 5, ip(8, 8, 8, 8), 53, A, 5353, 90),
      oracle::tcp(t0 + 10, A, 40000, B, 80, oracle::ACK),
      oracle::tcp(t0 + 11, A, 40000, B, 80, oracle::FIN | oracle::ACK),
  };
  auto frames = oracle::ethernet_frames(p);
  frames.insert(frames.begin() + 4, frames[3]);
  return frames;
}

PipelineConfig config_for(const oracle::TempDir& dir, const std::string& out) {
  PipelineConfig c;
  c.inputs = {dir.file("day.pcap")};
  c.output_dir = dir.file(out);
  return c;
}

}  // namespace

TEST_CASE("ten-packet capture with two flows yields two rows") {
  oracle::TempDir dir;
  write_pcap(dir.file("day.pcap"), ten_packets());
  const auto results = run_pipeline(config_for(dir, "out"));
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  CHECK(r.dataset == "day-TE");
  CHECK(r.capture.packets_in == 10);
  CHECK(r.capture.duplicates_removed == 1);
  CHECK(r.capture.out_of_order == 1);
  CHECK(r.meter.admit.admitted == 9);
  CHECK(r.flows_metered == 2);
  CHECK(r.flows_exported == 2);
  CHECK(data_rows(r.csv_path) == 2);
  CHECK(r.audit.total_flows == 2);
  CHECK(r.audit.benign_flows == 2);
  CHECK(r.audit.nan_cells == 0);
  CHECK(r.audit.negative_cells == 0);
  CHECK_FALSE(fs::exists(dir.file("out/day-TE.prep.pcap")));
  for (const char* ext : {".csv", ".manifest.json", ".audit.json", ".audit.txt", ".capture_summary.csv"})
    CHECK(fs::exists(dir.file(std::string("out/day-TE") + ext)));

  const auto m = nlohmann::json::parse(slurp(r.manifest_path));
  CHECK(m["config"]["idle_timeout_ms"] == 60000);
  CHECK(m["config"]["active_timeout_ms"] == 120000);
  CHECK(m["config"]["dedup_window"] == 10000);
  CHECK(m["config"]["tcp_expiry"] == true);
  CHECK(m["input"]["sha256"] == sha256_file(dir.file("day.pcap")));
  CHECK(m["stages"]["export"]["rows"] == 2);
  CHECK(m["stages"]["export"]["sha256"] == sha256_file(r.csv_path));
  CHECK(m["stages"]["prep"]["duplicates_removed"] == 1);
}

TEST_CASE("runs are byte-for-byte reproducible") {
  oracle::TempDir dir;
  write_pcap(dir.file("day.pcap"), ten_packets());
  const auto a = run_pipeline(config_for(dir, "a"));
  const auto b = run_pipeline(config_for(dir, "b"));
  CHECK(slurp(a[0].csv_path) == slurp(b[0].csv_path));
  CHECK(slurp(dir.file("a/day-TE.audit.txt")) == slurp(dir.file("b/day-TE.audit.txt")));
  auto ma = nlohmann::json::parse(slurp(a[0].manifest_path))["stages"];
  auto mb = nlohmann::json::parse(slurp(b[0].manifest_path))["stages"];
  ma["export"].erase("path");
  mb["export"].erase("path");
  CHECK(ma == mb);
}

TEST_CASE("TE produces at least as many rows as nTE on a FIN-rich trace") {
  oracle::TempDir dir;
  oracle::TraceGen gen(3);
  write_pcap(dir.file("day.pcap"), oracle::ethernet_frames(gen.tcp_trace(2000)));
  auto te_cfg = config_for(dir, "te");
  auto nte_cfg = te_cfg;
  nte_cfg.meter.tcp_expiry_enabled = false;
  nte_cfg.output_dir = dir.file("nte");
  const auto te = run_pipeline(te_cfg);
  const auto nte = run_pipeline(nte_cfg);
  CHECK(nte[0].dataset == "day-nTE");
  CHECK(te[0].flows_metered >= nte[0].flows_metered);
  CHECK(te[0].audit.fin_gt2.total == 0);
  CHECK(te[0].audit.rst_gt2.total == 0);
}

TEST_CASE("rules are applied and the filter mode is honoured") {
  oracle::TempDir dir;
  const std::int64_t t0 = 1'499'170'000'000;
  std::vector<oracle::Pkt> p{
      oracle::tcp(t0, C, 1111, B, 21, oracle::ACK, 50),
      oracle::tcp(t0 + 1, C, 1112, B, 21, oracle::RST),
      oracle::udp(t0 + 2, A, 1, B, 2, 0),
  };
  write_pcap(dir.file("day.pcap"), oracle::ethernet_frames(p));
  std::ofstream(dir.file("r.rules")) << "[rule]\nlabel = FTP-Patator\nstart = 2017-07-04T00:00Z\n"
                                        "end = 2017-07-05T00:00Z\nsrc_ips = 172.16.0.1\ndst_ports = 21\n";
  auto cfg = config_for(dir, "out");
  cfg.rules_path = dir.file("r.rules");
  auto r = run_pipeline(cfg)[0];
  CHECK(r.labels.matched == 2);
  CHECK(r.flows_dropped == 1);  // the lone RST flow
  CHECK(r.audit.per_label.at("FTP-Patator") == 1);
  CHECK(r.audit.per_label.at("BENIGN") == 1);

  cfg.filter_mode = post::FilterMode::literal;
  cfg.output_dir = dir.file("lit");
  r = run_pipeline(cfg)[0];
  CHECK(r.flows_exported == 0);  // literal mode drops every single-packet flow
}

TEST_CASE("failures are tagged with their stage and leave no outputs") {
  oracle::TempDir dir;
  write_pcap(dir.file("day.pcap"), ten_packets());

  SUBCASE("unreadable capture") {
    auto cfg = config_for(dir, "out");
    cfg.inputs.push_back(dir.file("missing.pcap"));
    try {
      run_pipeline(cfg);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == Stage::prep);
      CHECK(exit_code(e.stage()) == 11);
    }
    CHECK(fs::is_empty(dir.file("out")));
  }
  SUBCASE("broken rule file") {
    std::ofstream(dir.file("bad.rules")) << "[rule]\nlabel = X\n";
    auto cfg = config_for(dir, "out");
    cfg.rules_path = dir.file("bad.rules");
    try {
      run_pipeline(cfg);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == Stage::label);
      CHECK(exit_code(e.stage()) == 13);
    }
  }
  SUBCASE("garbage capture fails in prep") {
    std::ofstream(dir.file("junk.pcap")) << "not a capture at all, really";
    auto cfg = config_for(dir, "out");
    cfg.inputs = {dir.file("junk.pcap")};
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
    CHECK(fs::is_empty(dir.file("out")));
  }
  SUBCASE("skipping prep on a bad capture fails in meter") {
    std::ofstream(dir.file("junk.pcap")) << "not a capture at all, really";
    auto cfg = config_for(dir, "out");
    cfg.inputs = {dir.file("junk.pcap")};
    cfg.skip_prep = true;
    try {
      run_pipeline(cfg);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == Stage::meter);
    }
  }
  SUBCASE("invalid configuration") {
    auto cfg = config_for(dir, "out");
    cfg.meter.active_timeout_ms = -1;
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
    cfg = config_for(dir, "out");
    cfg.audit_profile = "argus";
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
  }
}

TEST_CASE("several inputs are processed independently") {
  oracle::TempDir dir;
  oracle::TraceGen gen(1);
  std::vector<std::string> inputs;
  for (const char* day : {"Mon", "Tue", "Wed"}) {
    inputs.push_back(dir.file(std::string(day) + ".pcap"));
    write_pcap(inputs.back(), oracle::ethernet_frames(gen.trace({})));
  }
  PipelineConfig cfg;
  cfg.inputs = inputs;
  cfg.output_dir = dir.file("out");
  cfg.keep_intermediate = true;
  const auto all = run_pipeline(cfg);
  REQUIRE(all.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    PipelineConfig one = cfg;
    one.inputs = {inputs[i]};
    one.output_dir = dir.file("single" + std::to_string(i));
    const auto single = run_pipeline(one);
    CHECK(slurp(all[i].csv_path) == slurp(single[0].csv_path));
    CHECK(fs::exists(dir.file("out/" + all[i].dataset + ".prep.pcap")));
  }
}

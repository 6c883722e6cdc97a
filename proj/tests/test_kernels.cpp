#include <doctest.h>

#include <omp.h>

#include "flowlab/flow_engine.hpp"
#include "flowlab/kernels.hpp"
#include "oracle.hpp"

using namespace flowlab;
using oracle::ip;

namespace {

// The build host may have a single core; force a real team so the parallel
// paths split their work.
struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

std::vector<FlowRecord> records(std::uint64_t seed, std::size_t packets) {
  oracle::TraceGen gen(seed);
  oracle::TraceShape shape;
  shape.packets = packets;
  shape.hosts = 8;
  shape.ports = 6;
  return meter_packets(oracle::ethernet_frames(gen.trace(shape)), {}, 1);
}

}  // namespace

TEST_CASE("parallel kernels reproduce their serial references") {
  for (int threads : {1, 3, 4}) {
    Threads guard(threads);
    CAPTURE(threads);
    oracle::TraceGen gen(static_cast<std::uint64_t>(threads) * 11);

    std::vector<RawPacket> frames;
    for (int i = 0; i < 3000; ++i) {
      RawPacket p;
      p.frame = gen.small_frame(50);
      p.ts_us = i;
      frames.push_back(p);
    }
    CHECK(kernels::frame_digests(frames) == kernels::serial::frame_digests(frames));
    for (std::size_t window : {1u, 2u, 10u, 10000u}) {
      const auto a = kernels::deduplicate(frames, window);
      const auto b = kernels::serial::deduplicate(frames, window);
      CHECK(a.duplicates_removed == b.duplicates_removed);
      REQUIRE(a.packets.size() == b.packets.size());
      for (std::size_t i = 0; i < a.packets.size(); ++i) CHECK(a.packets[i].ts_us == b.packets[i].ts_us);
    }

    const auto recs = records(99, 3000);
    const auto fa = kernels::finalize_all(recs);
    const auto fb = kernels::serial::finalize_all(recs);
    REQUIRE(fa.size() == fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
      CHECK(fa[i].key == fb[i].key);
      CHECK(fa[i].values == fb[i].values);
    }

    std::vector<label::LabelRule> rules(3);
    for (std::size_t i = 0; i < rules.size(); ++i) {
      rules[i].label = i == 2 ? "PortScan" : "Attack" + std::to_string(i);
      rules[i].window_start_ms = 0;
      rules[i].window_end_ms = std::numeric_limits<std::int64_t>::max();
      rules[i].dst_ports = {{static_cast<std::uint16_t>(80 + i), static_cast<std::uint16_t>(443)}};
    }
    auto la = fa, lb = fb;
    const auto ca = kernels::label_flows(la, rules);
    const auto cb = kernels::serial::label_flows(lb, rules);
    CHECK(ca.matched == cb.matched);
    CHECK(ca.ambiguous == cb.ambiguous);
    CHECK(ca.zpl_overrides == cb.zpl_overrides);
    CHECK(ca.matched > 0);
    for (std::size_t i = 0; i < la.size(); ++i) CHECK(la[i].label == lb[i].label);

    for (auto mode : {post::FilterMode::prose, post::FilterMode::literal})
      CHECK(kernels::keep_mask(la, mode) == kernels::serial::keep_mask(lb, mode));

    std::vector<std::string> lines;
    for (int i = 0; i < 2001; ++i)
      lines.push_back(std::to_string(gen.uniform(-2, 5)) + "," + std::to_string(gen.uniform(0, 4)) + ",0," +
                      (gen.chance(0.5) ? "BENIGN" : "DDoS"));
    const auto mapping = audit::ColumnMapping::builtin("cicids2017");
    const auto cols = audit::resolve_columns({"Flow IAT Min", "FIN Flag Count", "RST Flag Count", "Label"}, mapping);
    CHECK(kernels::audit_lines(lines, cols, mapping).to_json() ==
          kernels::serial::audit_lines(lines, cols, mapping).to_json());
  }
}

TEST_CASE("kernels handle empty input") {
  Threads guard(4);
  CHECK(kernels::frame_digests({}).empty());
  CHECK(kernels::finalize_all({}).empty());
  CHECK(kernels::keep_mask({}, post::FilterMode::prose).empty());
  const auto mapping = audit::ColumnMapping::builtin("cicids2017");
  const auto cols = audit::resolve_columns({"FIN Flag Count", "RST Flag Count", "Label"}, mapping);
  CHECK(kernels::audit_lines({}, cols, mapping).rows == 0);
}

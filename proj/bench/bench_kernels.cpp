// Serial references against the OpenMP kernels. Arg 0 selects serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "flowlab/flow_engine.hpp"
#include "flowlab/kernels.hpp"
#include "oracle.hpp"

using namespace flowlab;

namespace {

const std::vector<RawPacket>& frames() {
  static const auto v = [] {
    oracle::TraceGen gen(1);
    oracle::TraceShape shape;
    shape.packets = 200'000;
    shape.hosts = 64;
    shape.ports = 32;
    return oracle::ethernet_frames(gen.trace(shape));
  }();
  return v;
}

const std::vector<FlowRecord>& records() {
  static const auto v = meter_packets(frames(), {}, 1);
  return v;
}

const std::vector<FeatureVector>& features() {
  static const auto v = kernels::serial::finalize_all(records());
  return v;
}

std::vector<label::LabelRule> rules() {
  std::vector<label::LabelRule> out(40);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].label = "Attack" + std::to_string(i % 7);
    out[i].window_start_ms = 0;
    out[i].window_end_ms = std::numeric_limits<std::int64_t>::max();
    out[i].src_ips = {{oracle::ip(10, 0, 0, static_cast<unsigned>(i + 1)), 32}};
    out[i].dst_ports = {{static_cast<std::uint16_t>(i % 2 ? 80 : 443), static_cast<std::uint16_t>(i % 2 ? 80 : 443)}};
    out[i].priority = out[i].specificity();
  }
  return out;
}

void BM_frame_digests(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(state.range(0) ? kernels::frame_digests(frames()) : kernels::serial::frame_digests(frames()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames().size()));
}

void BM_deduplicate(benchmark::State& state) {
  for (auto _ : state) {
    auto r = state.range(0) ? kernels::deduplicate(frames(), prep::kDefaultDedupWindow)
                            : kernels::serial::deduplicate(frames(), prep::kDefaultDedupWindow);
    benchmark::DoNotOptimize(r.duplicates_removed);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames().size()));
}

void BM_finalize_all(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(state.range(0) ? kernels::finalize_all(records()) : kernels::serial::finalize_all(records()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records().size()));
}

void BM_label_flows(benchmark::State& state) {
  const auto r = rules();
  for (auto _ : state) {
    state.PauseTiming();
    auto flows = features();
    state.ResumeTiming();
    auto c = state.range(0) ? kernels::label_flows(flows, r) : kernels::serial::label_flows(flows, r);
    benchmark::DoNotOptimize(c.matched);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(features().size()));
}

void BM_keep_mask(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(state.range(0) ? kernels::keep_mask(features(), post::FilterMode::prose)
                                            : kernels::serial::keep_mask(features(), post::FilterMode::prose));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(features().size()));
}

void BM_audit_lines(benchmark::State& state) {
  static const auto lines = [] {
    std::vector<std::string> v;
    oracle::TraceGen gen(2);
    for (int i = 0; i < 200'000; ++i)
      v.push_back(std::to_string(gen.uniform(-1, 900)) + "," + std::to_string(gen.uniform(0, 4)) + "," +
                  std::to_string(gen.uniform(0, 3)) + "," + (gen.chance(0.8) ? "BENIGN" : "DDoS"));
    return v;
  }();
  const auto mapping = audit::ColumnMapping::builtin("cicids2017");
  const auto cols = audit::resolve_columns({"Flow IAT Min", "FIN Flag Count", "RST Flag Count", "Label"}, mapping);
  for (auto _ : state) {
    auto r = state.range(0) ? kernels::audit_lines(lines, cols, mapping)
                            : kernels::serial::audit_lines(lines, cols, mapping);
    benchmark::DoNotOptimize(r.rows);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lines.size()));
}

}  // namespace

BENCHMARK(BM_frame_digests)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deduplicate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_finalize_all)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_label_flows)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_keep_mask)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_audit_lines)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  // Build the shared inputs before timing anything.
  features();
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}

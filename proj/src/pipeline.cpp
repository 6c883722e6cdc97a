#include "flowlab/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>

#include <json.hpp>

#include "flowlab/flow_csv.hpp"

namespace flowlab {

namespace fs = std::filesystem;

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::prep: return "prep";
    case Stage::meter: return "meter";
    case Stage::label: return "label";
    case Stage::filter: return "filter";
    case Stage::export_csv: return "export";
    case Stage::audit: return "audit";
  }
  return "unknown";
}

std::string dataset_suffix(const MeterConfig& meter) {
  return meter.tcp_expiry_enabled ? "-TE" : "-nTE";
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::vector<FeatureVector> meter_capture(const std::string& pcap_path, const MeterConfig& config,
                                         MeterStats* stats) {
  PcapReader reader(pcap_path);
  FlowMeter meter(config, reader.link_type());
  std::vector<FlowRecord> expired;
  std::vector<FeatureVector> out;
  auto drain = [&] {
    for (const auto& f : expired) out.push_back(finalize(f));
    expired.clear();
  };
  while (auto pkt = reader.next()) {
    meter.process(*pkt, expired);
    if (expired.size() >= 4096) drain();
  }
  meter.flush(expired);
  drain();
  if (stats) *stats = meter.stats();
  return out;
}

namespace {

nlohmann::json meter_stats_json(const MeterStats& s) {
  nlohmann::json dropped;
  for (std::size_t i = 0; i < kDropReasonCount; ++i)
    dropped[to_string(static_cast<DropReason>(i))] = s.admit.dropped[i];
  return {{"packets_seen", s.packets_seen},
          {"packets_admitted", s.admit.admitted},
          {"packets_dropped", dropped},
          {"non_monotonic_packets", s.non_monotonic},
          {"flows_created", s.flows_created},
          {"expired_policy", s.expired_policy},
          {"expired_idle", s.expired_idle},
          {"expired_active", s.expired_active},
          {"flushed", s.flushed}};
}

InputResult run_one(const PipelineConfig& config, const std::string& input,
                    const std::vector<label::LabelRule>& rules) {
  InputResult r;
  r.input = input;
  r.dataset = fs::path(input).stem().string() + dataset_suffix(config.meter);
  const fs::path out_dir(config.output_dir);
  const auto out = [&](const std::string& ext) { return (out_dir / (r.dataset + ext)).string(); };

  std::vector<std::string> created;
  auto track = [&](const std::string& p) {
    created.push_back(p);
    return p;
  };
  auto stage = [&](Stage s, auto&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(s, input + ": " + e.what());
    }
  };

  try {
    std::string metered_input = input;
    stage(Stage::prep, [&] {
      if (config.skip_prep) return;
      metered_input = track(out(".prep.pcap"));
      r.capture = prep::prepare_capture(input, metered_input, config.dedup_window);
      std::ofstream(track(out(".capture_summary.csv")), std::ios::binary)
          << prep::summary_csv({{r.dataset, r.capture}});
    });

    std::vector<FeatureVector> flows;
    stage(Stage::meter, [&] {
      flows = meter_capture(metered_input, config.meter, &r.meter);
      r.flows_metered = flows.size();
      if (!config.skip_prep && !config.keep_intermediate) {
        fs::remove(metered_input);
        created.erase(std::remove(created.begin(), created.end(), metered_input), created.end());
      }
    });

    stage(Stage::label, [&] { r.labels = kernels::label_flows(flows, rules, {config.temporal}); });

    stage(Stage::filter, [&] {
      const auto mask = kernels::keep_mask(flows, config.filter_mode);
      std::vector<LabeledFlow> kept;
      kept.reserve(flows.size());
      for (std::size_t i = 0; i < flows.size(); ++i)
        if (mask[i]) kept.push_back(std::move(flows[i]));
      r.flows_dropped = flows.size() - kept.size();
      flows = std::move(kept);
    });

    stage(Stage::export_csv, [&] {
      r.csv_path = track(out(".csv"));
      csv::export_csv(flows, r.csv_path);
      r.flows_exported = flows.size();
    });

    stage(Stage::audit, [&] {
      r.audit = audit::audit_file(r.csv_path, audit::ColumnMapping::builtin(config.audit_profile),
                                  r.dataset);
      std::ofstream(track(out(".audit.json")), std::ios::binary) << r.audit.to_json();
      std::ofstream(track(out(".audit.txt")), std::ios::binary) << r.audit.to_text();
    });

    nlohmann::json manifest{
        {"tool", "flowlab"},
        {"version", kVersion},
        {"dataset", r.dataset},
        {"config",
         {{"dedup_window", config.dedup_window},
          {"skip_prep", config.skip_prep},
          {"idle_timeout_ms", config.meter.idle_timeout_ms},
          {"active_timeout_ms", config.meter.active_timeout_ms},
          {"tcp_expiry", config.meter.tcp_expiry_enabled},
          {"idle_sweep", config.meter.idle_sweep},
          {"protocol_filter", "ipv4/tcp,ipv4/udp"},
          {"dissection", false},
          {"statistics", true},
          {"packet_size", "ip_total_length"},
          {"stddev", "sample"},
          {"timeout_comparison", "strict_greater"},
          {"filter_mode", post::to_string(config.filter_mode)},
          {"temporal_validation",
           config.temporal == label::TemporalMode::overlap ? "overlap" : "start_in"},
          {"rules", config.rules_path},
          {"rules_sha256", config.rules_path.empty() ? "" : sha256_file(config.rules_path)},
          {"rule_count", rules.size()},
          {"audit_profile", config.audit_profile}}},
        {"input", {{"path", input}, {"bytes", fs::file_size(input)}, {"sha256", sha256_file(input)}}},
        {"stages",
         {{"prep",
           config.skip_prep
               ? nlohmann::json{{"skipped", true}}
               : nlohmann::json{{"packets_in", r.capture.packets_in},
                                {"duplicates_removed", r.capture.duplicates_removed},
                                {"frames_out", r.capture.frames_out},
                                {"out_of_order", r.capture.out_of_order}}},
          {"meter", meter_stats_json(r.meter)},
          {"label",
           {{"flows", r.flows_metered},
            {"matched", r.labels.matched},
            {"ambiguous", r.labels.ambiguous},
            {"zpl_overrides", r.labels.zpl_overrides}}},
          {"filter", {{"mode", post::to_string(config.filter_mode)}, {"dropped", r.flows_dropped}}},
          {"export", {{"rows", r.flows_exported}, {"path", r.csv_path}, {"sha256", sha256_file(r.csv_path)}}},
          {"audit",
           {{"total_flows", r.audit.total_flows},
            {"nan_cells", r.audit.nan_cells},
            {"negative_cells", r.audit.negative_cells},
            {"fin_gt2", r.audit.fin_gt2.total},
            {"rst_gt2", r.audit.rst_gt2.total}}}}},
    };
    r.manifest_path = track(out(".manifest.json"));
    std::ofstream(r.manifest_path, std::ios::binary) << manifest.dump(2) << '\n';
    r.outputs = created;
  } catch (...) {
    std::error_code ec;
    for (const auto& p : created) fs::remove(p, ec);
    throw;
  }
  return r;
}

}  // namespace

std::vector<InputResult> run_pipeline(const PipelineConfig& config) {
  try {
    config.meter.validate();
    audit::ColumnMapping::builtin(config.audit_profile);
  } catch (const std::exception& e) {
    throw StageError(Stage::prep, std::string("invalid configuration: ") + e.what());
  }
  if (config.dedup_window == 0) throw StageError(Stage::prep, "dedup window must be >= 1");

  std::vector<label::LabelRule> rules;
  if (!config.rules_path.empty()) {
    try {
      rules = label::load_rules(config.rules_path);
    } catch (const std::exception& e) {
      throw StageError(Stage::label, e.what());
    }
  }
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw StageError(Stage::prep, "cannot create output directory " + config.output_dir);

  std::vector<InputResult> results(config.inputs.size());
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto n = static_cast<std::int64_t>(config.inputs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      results[i] = run_one(config, config.inputs[i], rules);
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) {
    for (const auto& r : results)
      for (const auto& p : r.outputs) fs::remove(p, ec);
    std::rethrow_exception(failure);
  }
  return results;
}

}  // namespace flowlab

// flowlab: capture prep, flow metering, labeling, post-filtering and dataset
// audits from one binary. Each subcommand exits 0 on success and with
// 10 + stage number when that stage fails.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "flowlab/capture_prep.hpp"
#include "flowlab/dataset_audit.hpp"
#include "flowlab/flow_csv.hpp"
#include "flowlab/kernels.hpp"
#include "flowlab/pipeline.hpp"

namespace {

using namespace flowlab;

struct MeterFlags {
  std::int64_t idle_ms = 60'000;
  std::int64_t active_ms = 120'000;
  bool tcp_expiry = true;
  bool no_idle_sweep = false;

  void attach(CLI::App* app) {
    app->add_option("--idle-timeout-ms", idle_ms, "Idle timeout in milliseconds")
        ->capture_default_str();
    app->add_option("--active-timeout-ms", active_ms, "Active timeout in milliseconds")
        ->capture_default_str();
    app->add_option("--tcp-expiry", tcp_expiry,
                    "Expire TCP flows on the first FIN/RST (true: TE dataset, false: nTE)")
        ->capture_default_str();
    app->add_flag("--no-idle-sweep", no_idle_sweep,
                  "Hold idle flows until their next packet or the final flush");
  }

  MeterConfig config() const {
    MeterConfig c;
    c.idle_timeout_ms = idle_ms;
    c.active_timeout_ms = active_ms;
    c.tcp_expiry_enabled = tcp_expiry;
    c.idle_sweep = !no_idle_sweep;
    return c;
  }
};

const std::map<std::string, post::FilterMode> kFilterModes{
    {"prose", post::FilterMode::prose}, {"literal", post::FilterMode::literal}};
const std::map<std::string, label::TemporalMode> kTemporalModes{
    {"overlap", label::TemporalMode::overlap}, {"start", label::TemporalMode::start_in}};

template <typename Fn>
int guarded(Stage stage, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << to_string(stage) << ": " << e.what() << '\n';
    return exit_code(stage);
  }
}

audit::ColumnMapping mapping_for(const std::string& profile, const std::string& mapping_file) {
  return mapping_file.empty() ? audit::ColumnMapping::builtin(profile)
                              : audit::ColumnMapping::load(mapping_file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowlab: labeled bidirectional flow datasets from packet captures"};
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file; keys go in a section named after the subcommand, flags win");
  app.set_version_flag("--version", std::string(flowlab::kVersion));
  app.require_subcommand(1);
  int rc = 0;

  // prep
  auto* prep_cmd = app.add_subcommand("prep", "Remove windowed duplicate frames and reorder by time");
  std::string prep_in, prep_out, prep_summary;
  std::size_t prep_window = prep::kDefaultDedupWindow;
  prep_cmd->add_option("-i,--input", prep_in, "Input capture (classic pcap)")->required();
  prep_cmd->add_option("-o,--output", prep_out, "Output capture")->required();
  prep_cmd->add_option("-w,--window", prep_window, "Dedup window in retained frames")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  prep_cmd->add_option("--summary", prep_summary, "Write the capture summary CSV here");
  prep_cmd->callback([&] {
    rc = guarded(Stage::prep, [&] {
      const auto s = prep::prepare_capture(prep_in, prep_out, prep_window);
      const std::vector<std::pair<std::string, prep::CaptureSummary>> rows{{prep_in, s}};
      std::cout << prep::summary_table(rows);
      if (!prep_summary.empty()) std::ofstream(prep_summary, std::ios::binary) << prep::summary_csv(rows);
    });
  });

  // meter
  auto* meter_cmd = app.add_subcommand("meter", "Meter a capture into flow records");
  std::string meter_in, meter_out;
  MeterFlags meter_flags;
  meter_cmd->add_option("-i,--input", meter_in, "Input capture, already prepared")->required();
  meter_cmd->add_option("-o,--output", meter_out, "Output flow CSV (working schema)")->required();
  meter_flags.attach(meter_cmd);
  meter_cmd->callback([&] {
    rc = guarded(Stage::meter, [&] {
      MeterStats stats;
      const auto flows = meter_capture(meter_in, meter_flags.config(), &stats);
      try {
        csv::export_csv(flows, meter_out, csv::Schema::working);
      } catch (const std::exception& e) {
        throw StageError(Stage::export_csv, e.what());
      }
      std::cout << "packets " << stats.packets_seen << ", admitted " << stats.admit.admitted
                << ", flows " << flows.size() << " (policy " << stats.expired_policy << ", idle "
                << stats.expired_idle << ", active " << stats.expired_active << ", flushed "
                << stats.flushed << ")\n";
      if (stats.non_monotonic)
        std::cerr << "warning: " << stats.non_monotonic
                  << " packets arrived out of time order; run prep first\n";
    });
  });

  // label
  auto* label_cmd = app.add_subcommand("label", "Assign attack/BENIGN labels from a rule file");
  std::string label_in, label_out, label_rules, label_temporal = "overlap";
  label_cmd->add_option("-i,--input", label_in, "Flow CSV from `meter`")->required();
  label_cmd->add_option("-o,--output", label_out, "Labeled flow CSV (working schema)")->required();
  label_cmd->add_option("-r,--rules", label_rules, "Rule file")->required();
  label_cmd->add_option("--temporal", label_temporal, "Temporal validation: overlap or start")
      ->capture_default_str()
      ->check(CLI::IsMember({"overlap", "start"}));
  label_cmd->callback([&] {
    rc = guarded(Stage::label, [&] {
      const auto rules = label::load_rules(label_rules);
      bool has_payload = false;
      auto flows = csv::read_flows(label_in, &has_payload);
      if (!has_payload)
        throw std::runtime_error("input lacks payload columns; zero-payload handling needs the working schema from `meter`");
      const auto counts = kernels::label_flows(flows, rules, {kTemporalModes.at(label_temporal)});
      csv::export_csv(flows, label_out, csv::Schema::working);
      std::cout << "flows " << flows.size() << ", matched " << counts.matched
                << ", zero-payload overrides " << counts.zpl_overrides << '\n';
      if (counts.ambiguous)
        std::cerr << "warning: " << counts.ambiguous
                  << " flows matched equal-priority rules with different labels; first rule in file order won\n";
    });
  });

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Drop flows terminated by FIN/RST in their first packet");
  std::string filter_in, filter_out, filter_mode = "prose";
  bool filter_keep_payload = false;
  filter_cmd->add_option("-i,--input", filter_in, "Labeled flow CSV")->required();
  filter_cmd->add_option("-o,--output", filter_out, "Final flow CSV")->required();
  filter_cmd->add_option("-m,--mode", filter_mode, "prose or literal")
      ->capture_default_str()
      ->check(CLI::IsMember({"prose", "literal"}));
  filter_cmd->add_flag("--keep-payload-columns", filter_keep_payload,
                       "Write the working schema instead of the final export schema");
  filter_cmd->callback([&] {
    rc = guarded(Stage::filter, [&] {
      auto flows = csv::read_flows(filter_in);
      const auto mask = kernels::keep_mask(flows, kFilterModes.at(filter_mode));
      std::vector<LabeledFlow> kept;
      for (std::size_t i = 0; i < flows.size(); ++i)
        if (mask[i]) kept.push_back(std::move(flows[i]));
      csv::export_csv(kept, filter_out,
                      filter_keep_payload ? csv::Schema::working : csv::Schema::final_export);
      std::cout << "flows " << flows.size() << ", dropped " << flows.size() - kept.size() << ", kept "
                << kept.size() << '\n';
    });
  });

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Integrity census of one or more flow CSVs");
  std::vector<std::string> audit_inputs, audit_names;
  std::string audit_profile = "nfstream", audit_mapping, audit_json;
  audit_cmd->add_option("-i,--input", audit_inputs, "Flow CSV(s)")->required();
  audit_cmd->add_option("-n,--name", audit_names, "Dataset name per input");
  audit_cmd->add_option("-p,--profile", audit_profile, "Column naming profile")
      ->capture_default_str()
      ->check(CLI::IsMember(audit::ColumnMapping::builtin_names()));
  audit_cmd->add_option("--mapping", audit_mapping, "Column mapping file (overrides --profile)");
  audit_cmd->add_option("--json", audit_json, "Write the structured report(s) here");
  audit_cmd->callback([&] {
    rc = guarded(Stage::audit, [&] {
      const auto mapping = mapping_for(audit_profile, audit_mapping);
      std::vector<audit::AuditReport> reports;
      for (std::size_t i = 0; i < audit_inputs.size(); ++i) {
        reports.push_back(audit::audit_file(audit_inputs[i], mapping,
                                            i < audit_names.size() ? audit_names[i] : audit_inputs[i]));
        std::cout << reports.back().to_text();
      }
      if (reports.size() >= 2) std::cout << '\n' << audit::compare(reports).to_text();
      if (!audit_json.empty()) {
        std::ofstream out(audit_json, std::ios::binary);
        if (reports.size() == 1) {
          out << reports.front().to_json();
        } else {
          out << "[\n";
          for (std::size_t i = 0; i < reports.size(); ++i)
            out << reports[i].to_json() << (i + 1 < reports.size() ? ",\n" : "");
          out << "]\n";
        }
      }
    });
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: prep, meter, label, filter, export, audit");
  PipelineConfig run_cfg;
  MeterFlags run_meter;
  std::string run_filter = "prose", run_temporal = "overlap";
  run_cmd->add_option("-i,--input", run_cfg.inputs, "Input capture(s), one dataset per file")->required();
  run_cmd->add_option("-o,--output-dir", run_cfg.output_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("-r,--rules", run_cfg.rules_path, "Rule file (omit: everything BENIGN)");
  run_cmd->add_option("-w,--window", run_cfg.dedup_window, "Dedup window in retained frames")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--skip-prep", run_cfg.skip_prep, "Inputs are already deduplicated and ordered");
  run_cmd->add_flag("--keep-intermediate", run_cfg.keep_intermediate, "Keep the prepared capture");
  run_meter.attach(run_cmd);
  run_cmd->add_option("-m,--filter-mode", run_filter, "prose or literal")
      ->capture_default_str()
      ->check(CLI::IsMember({"prose", "literal"}));
  run_cmd->add_option("--temporal", run_temporal, "overlap or start")
      ->capture_default_str()
      ->check(CLI::IsMember({"overlap", "start"}));
  run_cmd->add_option("-p,--profile", run_cfg.audit_profile, "Audit column profile")
      ->capture_default_str()
      ->check(CLI::IsMember(audit::ColumnMapping::builtin_names()));
  run_cmd->callback([&] {
    rc = guarded(Stage::prep, [&] {
      run_cfg.meter = run_meter.config();
      run_cfg.filter_mode = kFilterModes.at(run_filter);
      run_cfg.temporal = kTemporalModes.at(run_temporal);
      const auto results = run_pipeline(run_cfg);
      for (const auto& r : results) {
        std::cout << r.dataset << ": " << r.flows_exported << " flows (" << r.audit.benign_flows
                  << " benign, " << r.audit.anomaly_flows << " anomaly), dropped " << r.flows_dropped
                  << ", NaN cells " << r.audit.nan_cells << ", negative cells "
                  << r.audit.negative_cells << "\n  " << r.csv_path << "\n  " << r.manifest_path
                  << '\n';
      }
    });
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}

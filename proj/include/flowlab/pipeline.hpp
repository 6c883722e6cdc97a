#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowlab/capture_prep.hpp"
#include "flowlab/dataset_audit.hpp"
#include "flowlab/flow_engine.hpp"
#include "flowlab/kernels.hpp"
#include "flowlab/labeler.hpp"
#include "flowlab/post_filter.hpp"

namespace flowlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Stage : int { prep = 1, meter, label, filter, export_csv, audit };
const char* to_string(Stage stage);
// Process exit code for a failure in `stage`.
inline int exit_code(Stage stage) { return 10 + static_cast<int>(stage); }

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what)
      : std::runtime_error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

struct PipelineConfig {
  std::vector<std::string> inputs;
  std::string output_dir = ".";
  std::size_t dedup_window = prep::kDefaultDedupWindow;
  bool skip_prep = false;
  bool keep_intermediate = false;
  MeterConfig meter;
  post::FilterMode filter_mode = post::FilterMode::prose;
  std::string rules_path;  // empty: every flow is BENIGN
  label::TemporalMode temporal = label::TemporalMode::overlap;
  std::string audit_profile = "nfstream";
};

// Dataset naming follows the expiry mode: "-TE" with TCP flag expiry, "-nTE" without.
std::string dataset_suffix(const MeterConfig& meter);

// Streams a capture through the flow meter and finalizes every emitted flow.
std::vector<FeatureVector> meter_capture(const std::string& pcap_path, const MeterConfig& config,
                                         MeterStats* stats = nullptr);

struct InputResult {
  std::string input;
  std::string dataset;  // output stem, e.g. "Monday-TE"
  std::string csv_path;
  std::string manifest_path;
  prep::CaptureSummary capture;
  MeterStats meter;
  kernels::LabelCounts labels;
  std::uint64_t flows_metered = 0;
  std::uint64_t flows_dropped = 0;
  std::uint64_t flows_exported = 0;
  audit::AuditReport audit;
  std::vector<std::string> outputs;  // every file written for this input
};

// Runs prep -> meter -> label -> filter -> export -> audit for every input.
// Inputs are independent and processed in parallel. Throws StageError from
// the first failing input after removing every output the run wrote.
std::vector<InputResult> run_pipeline(const PipelineConfig& config);

std::string sha256_file(const std::string& path);

}  // namespace flowlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dha/baselines.hpp"
#include "dha/generator.hpp"
#include "dha/model.hpp"
#include "dha/train.hpp"

namespace dha {

// Raised when a stage's input artifact is absent; maps to exit code 5.
struct MissingUpstream : std::runtime_error {
  explicit MissingUpstream(const std::string& path)
      : std::runtime_error("missing upstream artifact: " + path) {}
};

// Raised when outputs exist and --force was not given; maps to exit code 3.
struct WouldOverwrite : std::runtime_error {
  explicit WouldOverwrite(const std::string& path)
      : std::runtime_error("output exists (use --force to overwrite): " + path) {}
};

struct PipelineConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path report_dir = "reports";

  GeneratorConfig generator;
  std::uint64_t split_seed = 7;
  std::size_t vocab_max_size = 4096;
  ModelConfig model;
  LoraConfig lora;
  TrainConfig train;
  LinearTrainConfig baseline;
  std::uint64_t scenario_single_seed = 21;
  std::uint64_t scenario_teen_seed = 22;

  static PipelineConfig defaults();
  // Throws ConfigError naming the offending field.
  static PipelineConfig from_json_text(const std::string& text);
  std::uint64_t config_hash() const;
  std::string canonical_json() const;
};

struct StageOptions {
  bool force = false;
  bool resume = false;
};

// Pipeline stages; each returns a process exit code (0 success). Errors are
// reported on stderr.
int cmd_generate(const PipelineConfig& cfg, const StageOptions& opts);
int cmd_prepare(const PipelineConfig& cfg, const StageOptions& opts);
int cmd_train(const PipelineConfig& cfg, const StageOptions& opts);
int cmd_eval(const PipelineConfig& cfg, const StageOptions& opts);
int cmd_shift(const PipelineConfig& cfg, const StageOptions& opts);
int cmd_report(const PipelineConfig& cfg, const StageOptions& opts);

// Full argv interface used by the dha_forge binary.
int cli_main(const std::vector<std::string>& args);

}  // namespace dha

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gprobe/filter.hpp"
#include "gprobe/trainer.hpp"

namespace gprobe::cli {

struct PipelinePaths {
  std::filesystem::path dumps;
  std::filesystem::path probes;
  std::filesystem::path filters;
  std::filesystem::path reports;
};

/// Settings shared by the pipeline commands. Loaded from a JSON file; any
/// flag given on the command line overrides the file.
struct PipelineConfig {
  std::string model_id;
  std::vector<int> layers;  // empty: every layer present in the input
  int fl = 1;               // number of top layers to filter
  FilterKind filter_kind = FilterKind::BiasOnly;
  double epsilon = 1e-12;
  PipelinePaths paths;
  TrainConfig train;
  std::uint64_t seed = 0;

  /// Throws InputError when fl < 1 or a nested config is invalid.
  void validate() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string to_json(const PipelineConfig& config);
std::string to_json(const TrainConfig& config);

/// CRC-32 of the canonical JSON form, as 8 hex digits.
std::string config_hash(const PipelineConfig& config);

/// The `fl` highest layers among `available`, ascending. Throws InputError
/// when fewer are available.
std::vector<int> top_layers(std::vector<int> available, int fl);

}  // namespace gprobe::cli

#include "gprobe/cli/config.hpp"

#include <algorithm>

#include "json.hpp"

#include "gprobe/checksum.hpp"
#include "gprobe/edump_io.hpp"
#include "gprobe/errors.hpp"

namespace gprobe::cli {

namespace {

using json = nlohmann::json;

json train_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"clip_norm", c.clip_norm},
          {"clip_per_tensor", c.clip_per_tensor},
          {"lambda_o", c.lambda_o},
          {"patience_epochs", c.patience_epochs},
          {"patience_after_decay", c.patience_after_decay},
          {"decay_factor", c.decay_factor},
          {"max_decays", c.max_decays},
          {"max_epochs", c.max_epochs},
          {"task_weights", {{"bias", c.task_weights.bias}, {"gender", c.task_weights.gender}}},
          {"sv_init_scale", c.sv_init_scale},
          {"sv_l1", c.sv_l1},
          {"seed", c.seed}};
}

template <class T>
void read_into(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config field '") + key + "': " + e.what());
  }
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  read_into(j, "batch_size", c.batch_size);
  read_into(j, "lr", c.lr);
  read_into(j, "beta1", c.beta1);
  read_into(j, "beta2", c.beta2);
  read_into(j, "adam_eps", c.adam_eps);
  read_into(j, "clip_norm", c.clip_norm);
  read_into(j, "clip_per_tensor", c.clip_per_tensor);
  read_into(j, "lambda_o", c.lambda_o);
  read_into(j, "patience_epochs", c.patience_epochs);
  read_into(j, "patience_after_decay", c.patience_after_decay);
  read_into(j, "decay_factor", c.decay_factor);
  read_into(j, "max_decays", c.max_decays);
  read_into(j, "max_epochs", c.max_epochs);
  if (j.contains("task_weights")) {
    read_into(j["task_weights"], "bias", c.task_weights.bias);
    read_into(j["task_weights"], "gender", c.task_weights.gender);
  }
  read_into(j, "sv_init_scale", c.sv_init_scale);
  read_into(j, "sv_l1", c.sv_l1);
  read_into(j, "seed", c.seed);
  return c;
}

json pipeline_json(const PipelineConfig& c) {
  return {{"model_id", c.model_id},
          {"layers", c.layers},
          {"fl", c.fl},
          {"filter_kind", std::string(to_string(c.filter_kind))},
          {"epsilon", c.epsilon},
          {"paths",
           {{"dumps", c.paths.dumps.string()},
            {"probes", c.paths.probes.string()},
            {"filters", c.paths.filters.string()},
            {"reports", c.paths.reports.string()}}},
          {"train", train_json(c.train)},
          {"seed", c.seed}};
}

}  // namespace

void PipelineConfig::validate() const {
  if (fl < 1) throw InputError("fl must be at least 1");
  FilterSpec{filter_kind, epsilon, -1}.validate();
  train.validate();
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("config " + path.string() + ": expected a JSON object");
  PipelineConfig c;
  read_into(j, "model_id", c.model_id);
  read_into(j, "layers", c.layers);
  read_into(j, "fl", c.fl);
  if (j.contains("filter_kind")) c.filter_kind = filter_kind_from_string(j["filter_kind"].get<std::string>());
  read_into(j, "epsilon", c.epsilon);
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    if (p.contains("dumps")) c.paths.dumps = p["dumps"].get<std::string>();
    if (p.contains("probes")) c.paths.probes = p["probes"].get<std::string>();
    if (p.contains("filters")) c.paths.filters = p["filters"].get<std::string>();
    if (p.contains("reports")) c.paths.reports = p["reports"].get<std::string>();
  }
  if (j.contains("train")) c.train = train_from_json(j["train"]);
  read_into(j, "seed", c.seed);
  c.validate();
  return c;
}

std::string to_json(const PipelineConfig& config) { return pipeline_json(config).dump(); }

std::string to_json(const TrainConfig& config) { return train_json(config).dump(); }

std::string config_hash(const PipelineConfig& config) { return hex32(crc32(to_json(config))); }

std::vector<int> top_layers(std::vector<int> available, int fl) {
  std::sort(available.begin(), available.end());
  available.erase(std::unique(available.begin(), available.end()), available.end());
  if (fl < 1 || static_cast<std::size_t>(fl) > available.size()) {
    throw InputError("cannot filter the top " + std::to_string(fl) + " layers: " +
                     std::to_string(available.size()) + " available");
  }
  return {available.end() - fl, available.end()};
}

}  // namespace gprobe::cli

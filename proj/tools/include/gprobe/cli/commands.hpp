#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gprobe/cli/config.hpp"
#include "gprobe/datasets.hpp"
#include "gprobe/filter.hpp"
#include "gprobe/metrics.hpp"
#include "gprobe/synth.hpp"
#include "gprobe/trainer.hpp"

namespace gprobe::cli {

using Path = std::filesystem::path;
using LabeledPath = std::pair<std::string, Path>;

// gen-synth ------------------------------------------------------------------

struct GenSynthOptions {
  SynthConfig synth;
  Path out_dir;
  std::uint16_t layer = 0;
  std::string model_id = "synthetic";
  double baseline_scale = 1.0;  // std-dev of the shared baseline vectors
};

struct GenSynthResult {
  Path dump;
  Path truth;
  std::size_t records = 0;
  std::uint32_t crc = 0;
};

/// Writes synth.gedt (+ manifest with targets and a 60/20/20 split in
/// sample order) and truth.json into out_dir.
GenSynthResult cmd_gen_synth(const GenSynthOptions& options);

// make-prompts ---------------------------------------------------------------

struct MakePromptsOptions {
  Path out;
  std::optional<Path> lexicon;      // default: the reference lexicon
  std::optional<Path> lexicon_out;  // also write the lexicon used
  std::string mask_token = "[MASK]";
};

std::size_t cmd_make_prompts(const MakePromptsOptions& options);

// eval-bias ------------------------------------------------------------------

struct EvalBiasOptions {
  Path probs;
  Path out_dir;
  std::optional<Path> lexicon;
  std::size_t cap = 20;
};

struct NounBias {
  double rgp = 0.0;
  std::size_t prompts = 0;
};

struct EvalBiasResult {
  std::map<std::string, NounBias> nouns;
  BiasLexicon lexicon;
};

/// Pairs noun_revealed with both_masked rows by prompt id, averages RGP per
/// noun and extracts the bias lexicon. Writes noun_bias.csv,
/// bias_lexicon.json and bias_report.md.
EvalBiasResult cmd_eval_bias(const EvalBiasOptions& options);

/// noun,rgp[,...] CSV as written by eval-bias.
std::map<std::string, double> read_noun_bias_csv(const Path& path);

// prepare-winomt -------------------------------------------------------------

struct PrepareWinoOptions {
  Path winomt;
  Path bias_lexicon;  // bias_lexicon.json from eval-bias
  Path out;
  std::optional<Path> lexicon;  // bias classes; default: reference annotation
  std::uint64_t seed = 0;
  std::string mask_token = "[MASK]";
  bool include_swapped = true;
};

struct PrepareWinoResult {
  std::size_t sentences = 0;
  std::map<Split, std::size_t> nouns_per_split;
};

/// Writes the extraction manifest: sentences with split and variant texts,
/// plus probe targets.
PrepareWinoResult cmd_prepare_winomt(const PrepareWinoOptions& options);

// train-probe ----------------------------------------------------------------

struct TrainProbeOptions {
  Path dump;
  Path out_dir;
  PipelineConfig config;
  int jobs = 1;
};

struct SplitEvaluation {
  std::optional<ProbeEvaluation> bias;
  std::optional<ProbeEvaluation> gender;
};

struct LayerTrainSummary {
  int layer = 0;
  Path probe_path;
  Path report_path;
  std::uint32_t probe_hash = 0;
  TrainHistory history;
  SplitEvaluation dev;
  SplitEvaluation test;
};

/// Trains one joint probe per layer on the manifest's train split with the
/// dev split for early stopping. Layer L uses seed config.seed + L.
std::vector<LayerTrainSummary> cmd_train_probe(const TrainProbeOptions& options);

// build-filter ---------------------------------------------------------------

struct BuildFilterOptions {
  Path probes;  // directory of .gprb files or a single file
  Path out_dir;
  PipelineConfig config;
};

struct FilterSummary {
  int layer = 0;
  Path file;
  std::size_t kept = 0;
  std::size_t removed = 0;
  DimensionOverlap overlap;
};

/// One GFLT file per layer for the config.fl highest probed layers.
std::vector<FilterSummary> cmd_build_filter(const BuildFilterOptions& options);

/// Probes found at `path` (a .gprb file or a directory of them), by layer.
std::map<int, Path> find_probes(const Path& path);

// overlap --------------------------------------------------------------------

struct OverlapOptions {
  Path probes;
  double epsilon = 1e-12;
  std::optional<Path> out_csv;
};

std::map<int, DimensionOverlap> cmd_overlap(const OverlapOptions& options);

// report ---------------------------------------------------------------------

struct ReportOptions {
  std::vector<LabeledPath> bias;      // setting label -> noun_bias.csv
  std::vector<LabeledPath> accuracy;  // setting label -> gold,predicted,gender CSV
  std::optional<Path> lexicon;
  Path out_dir;
};

struct ReportResult {
  std::vector<std::pair<std::string, BiasAggregate>> bias_rows;
  std::vector<std::pair<std::string, AccuracyReport>> accuracy_rows;
  std::string input_hash;
  std::string markdown;
};

/// Aggregation tables (MSE gendered, MSE/MEAN/VAR gender-neutral) and
/// top-1 accuracy tables. Writes report.md and report.csv.
ReportResult cmd_report(const ReportOptions& options);

std::vector<TokenPrediction> read_accuracy_csv(const Path& path);

// epsilon-sweep --------------------------------------------------------------

/// 1e-2, 1e-4, ..., 1e-16.
std::vector<double> default_epsilon_grid();

struct SweepOptions {
  Path probe;
  std::vector<double> epsilons = default_epsilon_grid();
  std::optional<Path> out_dir;        // write one filter per epsilon and sweep.csv
  FilterKind kind = FilterKind::BiasOnly;
  std::vector<LabeledPath> bias;      // epsilon label -> noun_bias.csv
  std::optional<Path> lexicon;
  std::string model_id;
};

struct SweepRow {
  double epsilon = 0.0;
  std::size_t masked_bias_only = 0;
  std::size_t masked_bias_keep_gender = 0;
  std::size_t masked_gender_only = 0;
  std::optional<BiasAggregate> metrics;
  std::optional<Path> filter_file;
};

std::vector<SweepRow> cmd_epsilon_sweep(const SweepOptions& options);

}  // namespace gprobe::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gprobe/datasets.hpp"
#include "gprobe/filter.hpp"
#include "gprobe/metrics.hpp"
#include "gprobe/probe.hpp"

namespace gprobe {

// All binary formats are little-endian regardless of host order.

// ---------------------------------------------------------------------------
// GEDT embedding dumps
// ---------------------------------------------------------------------------

enum class RecordVariant : std::uint8_t { Baseline = 0, NounRevealed = 1, PronounRevealed = 2 };
enum class RecordRole : std::uint8_t { Pronoun = 0, Noun = 1 };

/// Manifest label of a record variant: both_masked, noun_revealed,
/// pronoun_revealed.
std::string_view variant_label(RecordVariant variant);

/// Baseline records exist at both positions, noun-revealed records at the
/// pronoun position and pronoun-revealed records at the noun position.
bool valid_combination(RecordVariant variant, RecordRole role);

struct EmbeddingRecord {
  std::uint32_t sentence_id = 0;
  RecordVariant variant = RecordVariant::Baseline;
  RecordRole role = RecordRole::Pronoun;
  std::uint16_t layer = 0;
  std::vector<float> vector;

  bool operator==(const EmbeddingRecord&) const = default;
};

struct SentenceEntry {
  std::uint32_t id = 0;
  std::string text;
  std::string noun;
  std::vector<std::string> variants;  // labels; empty accepts any variant
  std::optional<Split> split;
};

struct DumpManifest {
  std::string model_id;
  std::string tokenizer_id;
  std::uint32_t d_emb = 0;
  std::vector<std::uint16_t> layers;
  std::vector<SentenceEntry> sentences;
  std::vector<ProbeTargets> targets;
  // Filled by write_dump.
  std::uint64_t record_count = 0;
  std::uint64_t file_size = 0;
  std::string crc32;

  const SentenceEntry* find_sentence(std::uint32_t id) const;
  const ProbeTargets* find_targets(std::uint32_t sentence_id) const;
};

/// The manifest sits next to the dump at "<dump>.json".
std::filesystem::path manifest_path(const std::filesystem::path& dump);

/// Header (16 bytes) followed by packed records: sentence_id u32,
/// variant u8, role u8, layer u16, d_emb f32. Writes the manifest with the
/// file's CRC-32 and returns it. Throws InputError on a record that does
/// not match the manifest and IoError on write failure.
std::uint32_t write_dump(const std::filesystem::path& path,
                         const std::vector<EmbeddingRecord>& records, DumpManifest& manifest);

struct Dump {
  std::vector<EmbeddingRecord> records;
  DumpManifest manifest;
};

/// Throws BadMagicError, VersionError, TruncatedError or ChecksumError for
/// the respective corruption, IoError for other format faults and
/// InputError for records inconsistent with the manifest or non-finite
/// values.
Dump read_dump(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const DumpManifest& manifest);
DumpManifest load_manifest(const std::filesystem::path& path);

/// Probe samples of one layer. Bias samples are noun-revealed minus
/// baseline at the pronoun position; gender samples are each
/// pronoun-revealed record minus the baseline at the noun position, paired
/// in record order with the sentence's gender targets. Throws InputError
/// naming the sentence when a counterpart record or a target is missing.
std::vector<ProbeSample> assemble_probe_samples(const std::vector<EmbeddingRecord>& records,
                                                const std::vector<ProbeTargets>& targets,
                                                std::uint16_t layer);

// ---------------------------------------------------------------------------
// Probe files (GPRB): parameters in f64 so training output is kept exactly.
// ---------------------------------------------------------------------------

void write_probe(const std::filesystem::path& path, const JointProbe& probe);
JointProbe read_probe(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Filter files (GFLT)
// ---------------------------------------------------------------------------

/// "GFLT", version 1, d, M row-major f32, c f32, mask bytes, then a u32
/// length and a UTF-8 JSON trailer with spec, probe hash and model id.
void write_filter(const std::filesystem::path& path, const AffineFilter& filter);
AffineFilter read_filter(const std::filesystem::path& path);

std::vector<std::byte> encode_filter(const AffineFilter& filter);
AffineFilter decode_filter(std::span<const std::byte> bytes);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Comma-separated table with a header row; fields may be double-quoted.
/// Blank lines are skipped. Throws InputError naming the line when a row
/// has a different field count than the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable parse_csv(std::string_view content);
double parse_csv_number(const std::string& field, std::size_t line_no, std::string_view column);
std::string csv_escape(const std::string& field);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Pronoun probability records
// ---------------------------------------------------------------------------

/// CSV with header prompt_id,variant,p_male,p_female,p_neutral; an empty
/// p_neutral is absent. Throws InputError naming the line on malformed
/// input and for a file without records.
std::vector<PronounProbs> parse_probability_csv(std::string_view content);
std::vector<PronounProbs> read_probability_csv(const std::filesystem::path& path);
std::string format_probability_csv(const std::vector<PronounProbs>& records);

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace gprobe

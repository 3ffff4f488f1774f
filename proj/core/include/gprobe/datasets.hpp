#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gprobe/lexicon.hpp"
#include "gprobe/metrics.hpp"

namespace gprobe {

// ---------------------------------------------------------------------------
// Evaluation prompts
// ---------------------------------------------------------------------------

/// Where the noun phrase sits; decides the determiner.
enum class NounPosition {
  Predicate,  // "She is a nurse."
  Subject,    // "The nurse said that ..."
};

enum class SlotRole { Noun, Pronoun, Pronoun2 };

std::string_view to_string(SlotRole role);

struct PronounForms {
  std::string male;
  std::string female;
};

/// A template with "{NOUN}", "{PRONOUN}" and optionally "{PRONOUN2}" slots.
struct PromptTemplate {
  std::string text;
  NounPosition position = NounPosition::Predicate;
  PronounForms pronoun;
  std::optional<PronounForms> pronoun2;

  /// Throws InputError unless there is exactly one noun slot, one pronoun
  /// slot and a second pronoun slot exactly when pronoun2 is set.
  void validate() const;
};

/// The six evaluation templates.
const std::vector<PromptTemplate>& standard_templates();

struct MaskSlot {
  SlotRole role = SlotRole::Noun;
  std::size_t char_begin = 0;  // byte offsets of the mask token in text
  std::size_t char_end = 0;
  std::optional<PronounForms> forms;  // pronoun slots only
};

struct PromptInstance {
  std::string prompt_id;  // "<noun>#<template number>", shared by all variants
  std::string noun;
  int template_number = 0;  // 1-based
  PromptVariant variant = PromptVariant::NounRevealed;
  std::optional<GenderLabel> revealed_gender;  // PronounRevealed only
  std::string text;
  std::vector<MaskSlot> masks;  // in text order
};

/// Noun phrase with its determiner for a position, e.g. "the nurse",
/// "an engineer", "someone". Throws InputError when the entry has no
/// article rule.
std::string noun_phrase(const LexiconEntry& entry, NounPosition position);

/// For every noun x template: the noun-revealed variant, the both-masked
/// baseline and one pronoun-revealed variant per gender. A masked noun
/// phrase, determiner included, becomes a single mask token. When a
/// template has two pronoun slots both are masked together; the first is
/// the scored slot.
std::vector<PromptInstance> generate_prompt_instances(const std::vector<LexiconEntry>& nouns,
                                                      const std::vector<PromptTemplate>& templates,
                                                      std::string_view mask_token = "[MASK]");

std::string make_prompt_id(std::string_view noun, int template_number);

/// Splits "<noun>#<n>"; throws InputError on a malformed id.
std::pair<std::string, int> parse_prompt_id(std::string_view prompt_id);

void save_prompt_manifest(const std::filesystem::path& path,
                          const std::vector<PromptInstance>& instances,
                          std::string_view mask_token);

// ---------------------------------------------------------------------------
// WinoMT
// ---------------------------------------------------------------------------

enum class FactualGender { Female, Male, Neutral };

std::string_view to_string(FactualGender g);
FactualGender factual_gender_from_string(std::string_view name);

struct TokenSpan {
  std::size_t begin = 0;  // whitespace-token indices, end exclusive
  std::size_t end = 0;
};

struct WinoSentence {
  std::uint32_t id = 0;  // 0-based line order
  std::string text;
  std::string noun;
  TokenSpan noun_span;
  std::string pronoun;  // lowercased, punctuation stripped
  TokenSpan pronoun_span;
  FactualGender gold = FactualGender::Neutral;
  std::optional<BiasClass> bias_class;

  // Raw fields kept for lossless serialization.
  std::string raw_gender;
  std::string raw_index;
};

/// Tab-separated lines: gold gender, entity token index, sentence, noun.
/// Bias classes are taken from `classes` when given. Throws InputError
/// naming the line on a malformed line, an out-of-range index or a
/// sentence without a personal pronoun.
std::vector<WinoSentence> load_winomt(const std::filesystem::path& path,
                                      const std::map<std::string, BiasClass>* classes = nullptr);
std::vector<WinoSentence> parse_winomt(std::string_view content,
                                       const std::map<std::string, BiasClass>* classes = nullptr);
std::string serialize_winomt(const std::vector<WinoSentence>& sentences);

/// Pronoun value used as a gender target: -1 female, +1 male, 0 "they".
/// Throws InputError for a word that is not a personal pronoun.
double pronoun_gender_value(std::string_view pronoun);

/// Masked texts for the three variants of a WinoMT sentence. The noun mask
/// absorbs a preceding determiner. Pronoun-revealed texts follow the
/// gender-target order of build_probe_targets.
struct WinoVariants {
  std::string noun_revealed;  // pronoun masked
  std::string both_masked;
  std::vector<std::string> pronoun_revealed;
};

WinoVariants winomt_variants(const WinoSentence& sentence, std::string_view mask_token = "[MASK]",
                             bool include_swapped = true);

enum class Split { Train, Dev, Test };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

using SplitAssignment = std::map<std::string, Split>;

/// Noun-level 60/20/20 partition, rounded per bias class, so male- and
/// female-biased counts in each split differ by at most one. Throws
/// InputError when a noun has no class, a biased class has fewer than
/// three nouns, or the biased classes differ in size by more than three.
SplitAssignment split_winomt(const std::vector<WinoSentence>& sentences, std::uint64_t seed);

/// Regression targets for one sentence. Gender targets are listed in the
/// order the pronoun-revealed records of the sentence appear in a dump:
/// the original pronoun first, then the opposite gender when requested.
struct ProbeTargets {
  std::uint32_t sentence_id = 0;
  std::optional<double> bias;
  std::vector<double> gender;
};

/// Bias target is the noun's mean RGP; gender targets come from the
/// sentence pronoun. Throws InputError when a noun has no bias value.
std::vector<ProbeTargets> build_probe_targets(const std::vector<WinoSentence>& sentences,
                                              const std::map<std::string, double>& bias_lexicon,
                                              bool include_swapped = true);

}  // namespace gprobe

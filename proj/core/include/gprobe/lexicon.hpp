#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gprobe/metrics.hpp"

namespace gprobe {

enum class BiasClass { Female, Neutral, Male };

std::string_view to_string(BiasClass cls);
BiasClass bias_class_from_string(std::string_view name);

/// Column order of the per-model values in the reference tables.
enum class ReferenceModel { BertBase = 0, BertLarge = 1, Electra = 2 };

struct NeutralNoun {
  std::string noun;
  std::string article;  // "a", "an", or "none" when the noun takes no determiner
  std::array<double, 3> rgp{};
  double rgp_avg = 0.0;
  std::array<BiasClass, 3> model_class{};
  BiasClass annotated = BiasClass::Neutral;
};

struct GenderedNoun {
  std::string noun;
  std::string article;
  GenderLabel gender = GenderLabel::Female;
  std::array<double, 3> rgp{};
  double rgp_avg = 0.0;
};

/// The 104 gender-neutral professional nouns with published per-model RGP.
const std::vector<NeutralNoun>& reference_neutral_nouns();

/// The 26 gendered nouns with published per-model RGP.
const std::vector<GenderedNoun>& reference_gendered_nouns();

NounLexicon reference_lexicon();

/// Per-noun RGP of one reference model over both lists.
std::map<std::string, double> reference_biases(ReferenceModel model);

/// Noun entry of a lexicon file: class is set for gender-neutral nouns,
/// gender for gendered ones. An empty article means no determiner rule.
struct LexiconEntry {
  std::string noun;
  std::string article;
  std::optional<BiasClass> bias_class;
  std::optional<GenderLabel> gender;
};

std::vector<LexiconEntry> reference_entries();

/// Lexicon files are JSON arrays of
/// {"noun", "article", "class"?, "gender"?}.
std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);
void save_lexicon(const std::filesystem::path& path, const std::vector<LexiconEntry>& entries);
NounLexicon to_lexicon(const std::vector<LexiconEntry>& entries);

}  // namespace gprobe

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gprobe {

/// Which tokens of a prompt are visible to the model.
enum class PromptVariant {
  NounRevealed,     // pronoun masked, noun shown
  BothMasked,       // baseline: noun and pronoun masked
  PronounRevealed,  // noun masked, pronoun shown
};

std::string_view to_string(PromptVariant variant);
PromptVariant prompt_variant_from_string(std::string_view name);

/// Model probabilities of the male and female pronoun at a masked slot.
struct PronounProbs {
  std::string prompt_id;
  PromptVariant variant = PromptVariant::NounRevealed;
  double p_male = 0.0;
  double p_female = 0.0;
  std::optional<double> p_neutral;  // recorded, not used by GP
};

struct RgpRecord {
  std::string noun;
  std::string prompt_id;
  double rgp = 0.0;
};

enum class GenderLabel { Female, Male };

std::string_view to_string(GenderLabel label);

/// Gender-neutral nouns and gendered nouns with their semantic gender.
struct NounLexicon {
  std::set<std::string> gender_neutral;
  std::map<std::string, GenderLabel> gendered;

  /// Throws InputError if a noun is in both sets.
  void validate() const;
};

/// p_male / p_female. Throws InputError for a zero or non-finite female
/// probability and for probabilities outside (0, 1].
double gender_preference(const PronounProbs& p);

/// log GP(noun revealed) - log GP(both masked), natural logarithm.
double rgp(const PronounProbs& noun_revealed, const PronounProbs& baseline);

/// Mean RGP over the prompts of one noun.
double noun_bias(std::span<const RgpRecord> records);

struct BiasAggregate {
  double mse_gn = 0.0;   // mean RGP^2 over gender-neutral nouns
  double mean_gn = 0.0;  // mean RGP over gender-neutral nouns
  double var_gn = 0.0;   // mse_gn - mean_gn^2
  double mse_g = 0.0;    // mean RGP^2 over gendered nouns
  std::size_t n_gn = 0;
  std::size_t n_g = 0;
};

/// Aggregates per-noun biases over the lexicon. Every lexicon noun must have
/// a bias; an empty lexicon subset yields zeros for its statistics.
BiasAggregate aggregate(const std::map<std::string, double>& biases, const NounLexicon& lexicon);

struct BiasLexicon {
  std::vector<std::string> male_biased;    // descending RGP
  std::vector<std::string> female_biased;  // ascending RGP
};

/// Up to `cap` nouns with the highest strictly positive bias and up to `cap`
/// with the lowest strictly negative bias; ties resolve by noun.
BiasLexicon bias_lexicon_extract(const std::map<std::string, double>& biases, std::size_t cap = 20);

/// Sample Pearson correlation. Throws InputError on length mismatch or fewer
/// than two points, NumericalError when either side is constant.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct TokenPrediction {
  std::string gold;
  std::string predicted;
  std::optional<std::string> gender;
};

struct AccuracyReport {
  double overall = 0.0;
  std::size_t count = 0;
  std::map<std::string, double> per_gender;
  std::map<std::string, std::size_t> per_gender_count;
};

/// Exact-match top-1 accuracy, overall and per gender label.
AccuracyReport top1_accuracy(std::span<const TokenPrediction> records);

}  // namespace gprobe

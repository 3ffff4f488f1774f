#include "gprobe/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gprobe/errors.hpp"

namespace gprobe {

std::string_view to_string(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::NounRevealed: return "noun_revealed";
    case PromptVariant::BothMasked: return "both_masked";
    case PromptVariant::PronounRevealed: return "pronoun_revealed";
  }
  return "unknown";
}

PromptVariant prompt_variant_from_string(std::string_view name) {
  if (name == "noun_revealed") return PromptVariant::NounRevealed;
  if (name == "both_masked") return PromptVariant::BothMasked;
  if (name == "pronoun_revealed") return PromptVariant::PronounRevealed;
  throw InputError("unknown prompt variant '" + std::string(name) + "'");
}

std::string_view to_string(GenderLabel label) {
  return label == GenderLabel::Female ? "female" : "male";
}

void NounLexicon::validate() const {
  for (const auto& [noun, label] : gendered) {
    if (gender_neutral.count(noun) != 0) {
      throw InputError("lexicon noun '" + noun + "' is both gender-neutral and gendered");
    }
  }
}

double gender_preference(const PronounProbs& p) {
  auto check = [&](double x, const char* which) {
    if (!std::isfinite(x) || x <= 0.0 || x > 1.0) {
      throw InputError("prompt '" + p.prompt_id + "': " + which +
                       " probability must lie in (0, 1], got " + std::to_string(x));
    }
  };
  check(p.p_female, "female");
  check(p.p_male, "male");
  if (p.p_male + p.p_female > 1.0 + 1e-9) {
    throw InputError("prompt '" + p.prompt_id + "': male and female probabilities sum above 1");
  }
  return p.p_male / p.p_female;
}

double rgp(const PronounProbs& noun_revealed, const PronounProbs& baseline) {
  if (noun_revealed.variant != PromptVariant::NounRevealed) {
    throw InputError("rgp: first argument of prompt '" + noun_revealed.prompt_id +
                     "' must be the noun_revealed variant");
  }
  if (baseline.variant != PromptVariant::BothMasked) {
    throw InputError("rgp: second argument of prompt '" + baseline.prompt_id +
                     "' must be the both_masked variant");
  }
  if (noun_revealed.prompt_id != baseline.prompt_id) {
    throw InputError("rgp: prompt ids differ ('" + noun_revealed.prompt_id + "' vs '" +
                     baseline.prompt_id + "')");
  }
  return std::log(gender_preference(noun_revealed)) - std::log(gender_preference(baseline));
}

double noun_bias(std::span<const RgpRecord> records) {
  if (records.empty()) throw InputError("noun_bias: no records");
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.noun != records.front().noun) {
      throw InputError("noun_bias: records mix nouns '" + records.front().noun + "' and '" +
                       r.noun + "'");
    }
    sum += r.rgp;
  }
  return sum / static_cast<double>(records.size());
}

BiasAggregate aggregate(const std::map<std::string, double>& biases, const NounLexicon& lexicon) {
  auto lookup = [&](const std::string& noun) {
    const auto it = biases.find(noun);
    if (it == biases.end()) throw InputError("aggregate: no bias value for noun '" + noun + "'");
    return it->second;
  };

  BiasAggregate agg;
  for (const auto& noun : lexicon.gender_neutral) {
    const double b = lookup(noun);
    agg.mse_gn += b * b;
    agg.mean_gn += b;
  }
  agg.n_gn = lexicon.gender_neutral.size();
  if (agg.n_gn > 0) {
    agg.mse_gn /= static_cast<double>(agg.n_gn);
    agg.mean_gn /= static_cast<double>(agg.n_gn);
  }
  agg.var_gn = agg.mse_gn - agg.mean_gn * agg.mean_gn;

  for (const auto& [noun, label] : lexicon.gendered) {
    const double b = lookup(noun);
    agg.mse_g += b * b;
  }
  agg.n_g = lexicon.gendered.size();
  if (agg.n_g > 0) agg.mse_g /= static_cast<double>(agg.n_g);
  return agg;
}

BiasLexicon bias_lexicon_extract(const std::map<std::string, double>& biases, std::size_t cap) {
  std::vector<std::pair<std::string, double>> pos;
  std::vector<std::pair<std::string, double>> neg;
  for (const auto& [noun, b] : biases) {
    if (b > 0.0) pos.emplace_back(noun, b);
    if (b < 0.0) neg.emplace_back(noun, b);
  }
  // std::map iteration is already ordered by noun; stable sort keeps that
  // order among equal values.
  std::stable_sort(pos.begin(), pos.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::stable_sort(neg.begin(), neg.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });

  BiasLexicon out;
  for (std::size_t k = 0; k < std::min(cap, pos.size()); ++k) out.male_biased.push_back(pos[k].first);
  for (std::size_t k = 0; k < std::min(cap, neg.size()); ++k) out.female_biased.push_back(neg[k].first);
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: inputs differ in length");
  if (xs.size() < 2) throw InputError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("pearson: correlation undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AccuracyReport top1_accuracy(std::span<const TokenPrediction> records) {
  if (records.empty()) throw InputError("top1_accuracy: no records");
  AccuracyReport report;
  std::size_t correct = 0;
  std::map<std::string, std::size_t> correct_by_gender;
  for (const auto& r : records) {
    const bool hit = r.gold == r.predicted;
    correct += hit ? 1 : 0;
    if (r.gender) {
      report.per_gender_count[*r.gender] += 1;
      correct_by_gender[*r.gender] += hit ? 1 : 0;
    }
  }
  report.count = records.size();
  report.overall = static_cast<double>(correct) / static_cast<double>(records.size());
  for (const auto& [gender, n] : report.per_gender_count) {
    report.per_gender[gender] =
        static_cast<double>(correct_by_gender[gender]) / static_cast<double>(n);
  }
  return report;
}

}  // namespace gprobe

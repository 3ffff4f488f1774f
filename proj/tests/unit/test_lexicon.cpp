#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "gprobe/errors.hpp"
#include "gprobe/lexicon.hpp"
#include "gprobe/metrics.hpp"

using namespace gprobe;

namespace {

// Published aggregates recomputed from per-noun values rounded to three decimals.
constexpr double kRounding = 2e-3;

}  // namespace

TEST_CASE("reference lexicon inventory") {
  const auto& neutral = reference_neutral_nouns();
  const auto& gendered = reference_gendered_nouns();
  CHECK(neutral.size() == 104);
  CHECK(gendered.size() == 26);

  std::map<BiasClass, int> classes;
  for (const auto& n : neutral) ++classes[n.annotated];
  CHECK(classes[BiasClass::Female] == 20);
  CHECK(classes[BiasClass::Male] == 20);
  CHECK(classes[BiasClass::Neutral] == 64);

  int female = 0;
  for (const auto& g : gendered) female += g.gender == GenderLabel::Female;
  CHECK(female == 13);

  const NounLexicon lex = reference_lexicon();
  CHECK_NOTHROW(lex.validate());
  CHECK(lex.gender_neutral.size() == 104);
  CHECK(lex.gendered.size() == 26);
  CHECK(lex.gender_neutral.count("housekeeper") == 1);
  CHECK(lex.gendered.at("businesswoman") == GenderLabel::Female);
}

TEST_CASE("printed averages agree with the per-model values") {
  for (const auto& n : reference_neutral_nouns()) {
    const double avg = (n.rgp[0] + n.rgp[1] + n.rgp[2]) / 3.0;
    CHECK_MESSAGE(std::abs(avg - n.rgp_avg) <= kRounding, n.noun);
  }
  for (const auto& n : reference_gendered_nouns()) {
    const double avg = (n.rgp[0] + n.rgp[1] + n.rgp[2]) / 3.0;
    CHECK_MESSAGE(std::abs(avg - n.rgp_avg) <= kRounding, n.noun);
  }
}

TEST_CASE("unfiltered aggregate rows from per-noun biases") {
  const NounLexicon lex = reference_lexicon();

  const auto large = aggregate(reference_biases(ReferenceModel::BertLarge), lex);
  CHECK(std::abs(large.mse_g - 1.363) <= kRounding);
  CHECK(std::abs(large.mse_gn - 0.099) <= kRounding);
  CHECK(std::abs(large.mean_gn - 0.235) <= kRounding);
  CHECK(std::abs(large.var_gn - 0.044) <= kRounding);

  const auto electra = aggregate(reference_biases(ReferenceModel::Electra), lex);
  CHECK(std::abs(electra.mse_g - 1.360) <= kRounding);
  CHECK(std::abs(electra.mse_gn - 0.367) <= kRounding);
  CHECK(std::abs(electra.mean_gn - 0.163) <= kRounding);
  CHECK(std::abs(electra.var_gn - 0.340) <= kRounding);

  const auto base = aggregate(reference_biases(ReferenceModel::BertBase), lex);
  CHECK(std::abs(base.mse_g - 6.177) <= kRounding);
  CHECK(std::abs(base.mse_gn - 0.504) <= kRounding);
  CHECK(std::abs(base.mean_gn - 0.352) <= kRounding);
  // The printed VAR of this row (0.124) does not satisfy MSE - MEAN^2 with
  // the printed MSE and MEAN; the identity gives about 0.380.
  CHECK(std::abs(base.var_gn - (0.504 - 0.352 * 0.352)) <= kRounding);
}

TEST_CASE("per-model bias classes follow from top-20 extraction") {
  const ReferenceModel models[] = {ReferenceModel::BertBase, ReferenceModel::BertLarge,
                                   ReferenceModel::Electra};
  for (std::size_t m = 0; m < 3; ++m) {
    std::map<std::string, double> biases;
    for (const auto& n : reference_neutral_nouns()) biases[n.noun] = n.rgp[m];
    const auto lex = bias_lexicon_extract(biases, 20);
    const std::set<std::string> male(lex.male_biased.begin(), lex.male_biased.end());
    const std::set<std::string> female(lex.female_biased.begin(), lex.female_biased.end());
    for (const auto& n : reference_neutral_nouns()) {
      const BiasClass expected = male.count(n.noun)     ? BiasClass::Male
                                 : female.count(n.noun) ? BiasClass::Female
                                                        : BiasClass::Neutral;
      CHECK_MESSAGE(n.model_class[m] == expected, n.noun << " model " << m);
    }
    CHECK(reference_biases(models[m]).size() == 130);
  }
}

TEST_CASE("most biased nouns per direction") {
  std::map<std::string, double> avg;
  for (const auto& n : reference_neutral_nouns()) avg[n.noun] = n.rgp_avg;
  const auto lex = bias_lexicon_extract(avg, 8);
  CHECK(lex.female_biased.front() == "housekeeper");
  CHECK(avg.at("housekeeper") == doctest::Approx(-2.009));
  CHECK(avg.at("nurse") == doctest::Approx(-1.840));
  CHECK(avg.at("carpenter") == doctest::Approx(0.870));
  CHECK(std::find(lex.male_biased.begin(), lex.male_biased.end(), "carpenter") != lex.male_biased.end());
}

TEST_CASE("lexicon files round trip") {
  test::TempDir dir("lexicon");
  const auto entries = reference_entries();
  CHECK(entries.size() == 130);
  save_lexicon(dir / "lex.json", entries);
  const auto back = load_lexicon(dir / "lex.json");
  REQUIRE(back.size() == entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].noun == entries[i].noun);
    CHECK(back[i].article == entries[i].article);
    CHECK(back[i].bias_class == entries[i].bias_class);
    CHECK(back[i].gender == entries[i].gender);
  }
  const NounLexicon a = to_lexicon(back), b = reference_lexicon();
  CHECK(a.gender_neutral == b.gender_neutral);
  CHECK(a.gendered == b.gendered);
}

TEST_CASE("malformed lexicon files") {
  test::TempDir dir("badlex");
  auto write = [&](const std::string& text) {
    std::ofstream(dir / "l.json") << text;
    return dir / "l.json";
  };
  CHECK_THROWS_AS(load_lexicon(dir / "missing.json"), IoError);
  CHECK_THROWS_AS(load_lexicon(write("{")), InputError);
  CHECK_THROWS_AS(load_lexicon(write("{}")), InputError);
  CHECK_THROWS_AS(load_lexicon(write(R"([{"article":"a","class":"male"}])")), InputError);
  CHECK_THROWS_AS(load_lexicon(write(R"([{"noun":"x","article":"a"}])")), InputError);
  CHECK_THROWS_AS(load_lexicon(write(R"([{"noun":"x","class":"male","gender":"male"}])")), InputError);
  CHECK_THROWS_AS(load_lexicon(write(R"([{"noun":"x","gender":"other"}])")), InputError);
  CHECK_THROWS_AS(load_lexicon(write(R"([{"noun":"x","class":"unknown"}])")), InputError);
  CHECK_THROWS_AS(to_lexicon({{"x", "a", BiasClass::Male, std::nullopt},
                              {"x", "a", std::nullopt, GenderLabel::Male}}),
                  InputError);
}

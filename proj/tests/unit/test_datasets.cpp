#include <set>

#include "doctest.h"
#include "support.hpp"

#include "gprobe/datasets.hpp"
#include "gprobe/errors.hpp"
#include "gprobe/lexicon.hpp"

using namespace gprobe;

namespace {

const char* kWino =
    "male\t1\tThe developer argued with the designer because he did not like the design.\tdeveloper\n"
    "female\t4\tThe mover said thank you to the housekeeper because she is grateful.\thousekeeper\n"
    "neutral\t1\tThe nurse met someone and they talked.\tnurse\n";

std::vector<WinoSentence> synthetic_wino(int female, int male, int neutral) {
  std::vector<WinoSentence> out;
  auto add = [&](const std::string& prefix, int n, BiasClass cls) {
    for (int k = 0; k < n; ++k) {
      for (int rep = 0; rep < 2; ++rep) {
        WinoSentence s;
        s.id = static_cast<std::uint32_t>(out.size());
        s.noun = prefix + std::to_string(k);
        s.bias_class = cls;
        out.push_back(s);
      }
    }
  };
  add("f", female, BiasClass::Female);
  add("m", male, BiasClass::Male);
  add("n", neutral, BiasClass::Neutral);
  return out;
}

}  // namespace

TEST_CASE("standard templates") {
  const auto& t = standard_templates();
  REQUIRE(t.size() == 6);
  for (const auto& tpl : t) CHECK_NOTHROW(tpl.validate());
  CHECK(t[0].text == "{PRONOUN} is {NOUN}.");
  CHECK(t[3].pronoun.female == "Her");
  CHECK(t[4].pronoun2.has_value());
  CHECK(t[4].position == NounPosition::Subject);

  PromptTemplate bad{"{PRONOUN} is {NOUN} {NOUN}.", NounPosition::Predicate, {"He", "She"}, std::nullopt};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.text = "{PRONOUN} loves {PRONOUN2} {NOUN}.";
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("noun_phrase determiners") {
  const LexiconEntry nurse{"nurse", "a", BiasClass::Female, std::nullopt};
  const LexiconEntry engineer{"engineer", "an", BiasClass::Male, std::nullopt};
  const LexiconEntry someone{"someone", "none", BiasClass::Neutral, std::nullopt};
  CHECK(noun_phrase(nurse, NounPosition::Predicate) == "a nurse");
  CHECK(noun_phrase(nurse, NounPosition::Subject) == "the nurse");
  CHECK(noun_phrase(engineer, NounPosition::Predicate) == "an engineer");
  CHECK(noun_phrase(someone, NounPosition::Subject) == "someone");
  CHECK(noun_phrase(someone, NounPosition::Predicate) == "someone");
  CHECK_THROWS_AS(noun_phrase({"x", "", std::nullopt, std::nullopt}, NounPosition::Subject), InputError);
  CHECK_THROWS_AS(noun_phrase({"x", "the", std::nullopt, std::nullopt}, NounPosition::Subject), InputError);
}

TEST_CASE("prompt instances for one noun") {
  const std::vector<LexiconEntry> nouns{{"nurse", "a", BiasClass::Female, std::nullopt}};
  const auto inst = generate_prompt_instances(nouns, standard_templates());
  REQUIRE(inst.size() == 24);

  CHECK(inst[0].text == "[MASK] is a nurse.");
  CHECK(inst[0].variant == PromptVariant::NounRevealed);
  CHECK(inst[1].text == "[MASK] is [MASK].");
  CHECK(inst[2].text == "She is [MASK].");
  CHECK(inst[2].revealed_gender == GenderLabel::Female);
  CHECK(inst[3].text == "He is [MASK].");
  CHECK(inst[0].prompt_id == "nurse#1");

  const auto& subj = inst[16];
  CHECK(subj.template_number == 5);
  CHECK(subj.text == "The nurse said that [MASK] loves [MASK] job.");
  REQUIRE(subj.masks.size() == 2);
  CHECK(subj.masks[0].role == SlotRole::Pronoun);
  CHECK(subj.masks[1].role == SlotRole::Pronoun2);
  CHECK(inst[19].text == "[MASK] said that he loves his job.");

  for (const auto& i : inst) {
    for (const auto& m : i.masks) CHECK(i.text.substr(m.char_begin, m.char_end - m.char_begin) == "[MASK]");
  }
}

TEST_CASE("variants of one prompt differ only at masked slots") {
  const auto inst = generate_prompt_instances(reference_entries(), standard_templates(), "<mask>");
  CHECK(inst.size() == 130 * 6 * 4);
  std::map<std::string, std::vector<const PromptInstance*>> by_id;
  for (const auto& i : inst) by_id[i.prompt_id].push_back(&i);
  CHECK(by_id.size() == 130 * 6);
  for (const auto& [id, group] : by_id) {
    REQUIRE(group.size() == 4);
    const PromptInstance& both = *group[1];
    CHECK(both.variant == PromptVariant::BothMasked);
    // Remove the mask tokens and filled words; the literal frame must agree.
    auto frame = [](const PromptInstance& p) {
      std::string out;
      std::size_t pos = 0;
      for (const auto& m : p.masks) {
        out += p.text.substr(pos, m.char_begin - pos) + "#";
        pos = m.char_end;
      }
      return out + p.text.substr(pos);
    };
    const std::string base = frame(both);
    CHECK(std::count(base.begin(), base.end(), '#') == static_cast<long>(both.masks.size()));
    for (const PromptInstance* p : group) {
      CHECK(p->masks.size() <= both.masks.size());
      CHECK(p->text.find("<mask>") != std::string::npos);
    }
    const auto [noun, number] = parse_prompt_id(id);
    CHECK(make_prompt_id(noun, number) == id);
  }

  std::size_t neutral_pairs = 0;
  const auto neutral = reference_lexicon().gender_neutral;
  for (const auto& [id, group] : by_id) neutral_pairs += neutral.count(parse_prompt_id(id).first);
  CHECK(neutral_pairs == 624);

  for (const auto& i : inst) {
    if (i.noun == "someone" && i.variant == PromptVariant::NounRevealed && i.template_number == 5) {
      CHECK(i.text == "Someone said that <mask> loves <mask> job.");
    }
  }
}

TEST_CASE("prompt ids") {
  CHECK(parse_prompt_id("nurse#3") == std::pair<std::string, int>{"nurse", 3});
  CHECK(parse_prompt_id("a#b#12") == std::pair<std::string, int>{"a#b", 12});
  for (const char* bad : {"nurse", "#3", "nurse#", "nurse#0", "nurse#x", "nurse#3a"}) {
    CHECK_THROWS_AS(parse_prompt_id(bad), InputError);
  }
}

TEST_CASE("parse WinoMT") {
  const auto s = parse_winomt(kWino);
  REQUIRE(s.size() == 3);
  CHECK(s[0].gold == FactualGender::Male);
  CHECK(s[0].noun_span.begin == 1);
  CHECK(s[0].noun_span.end == 2);
  CHECK(s[0].pronoun == "he");
  CHECK(s[0].pronoun_span.begin == 7);
  CHECK(s[1].pronoun == "she");
  CHECK(s[2].pronoun == "they");
  CHECK(s[2].gold == FactualGender::Neutral);
  CHECK(serialize_winomt(s) == kWino);

  const std::map<std::string, BiasClass> classes{{"nurse", BiasClass::Female}};
  CHECK(parse_winomt(kWino, &classes)[2].bias_class == BiasClass::Female);
  CHECK_FALSE(parse_winomt(kWino, &classes)[0].bias_class.has_value());
}

TEST_CASE("malformed WinoMT lines name the line") {
  auto message = [](const std::string& text) {
    try {
      parse_winomt(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string ok = "male\t1\tThe cook said he is late.\tcook\n";
  CHECK(message(ok + "male\t1\tThe cook said he is late.\n").find("line 2") != std::string::npos);
  CHECK(message(ok + ok + "male\t9\tThe cook said he is late.\tcook\n").find("line 3") != std::string::npos);
  CHECK(message("other\t1\tThe cook said he is late.\tcook\n").find("line 1") != std::string::npos);
  CHECK(message("male\tx\tThe cook said he is late.\tcook\n").find("line 1") != std::string::npos);
  CHECK(message("male\t1\tThe cook is late.\tcook\n").find("pronoun") != std::string::npos);
  CHECK(parse_winomt("\n" + ok + "\r\n").size() == 1);
}

TEST_CASE("pronoun gender values") {
  CHECK(pronoun_gender_value("she") == -1.0);
  CHECK(pronoun_gender_value("His") == 1.0);
  CHECK(pronoun_gender_value("they") == 0.0);
  CHECK_THROWS_AS(pronoun_gender_value("it"), InputError);
}

TEST_CASE("WinoMT masked variants") {
  const auto s = parse_winomt(kWino);
  const auto v = winomt_variants(s[0]);
  CHECK(v.noun_revealed ==
        "The developer argued with the designer because [MASK] did not like the design.");
  CHECK(v.both_masked == "[MASK] argued with the designer because [MASK] did not like the design.");
  REQUIRE(v.pronoun_revealed.size() == 2);
  CHECK(v.pronoun_revealed[0] == "[MASK] argued with the designer because he did not like the design.");
  CHECK(v.pronoun_revealed[1] == "[MASK] argued with the designer because she did not like the design.");
  CHECK(winomt_variants(s[0], "[MASK]", false).pronoun_revealed.size() == 1);
  CHECK(winomt_variants(s[2]).pronoun_revealed.size() == 1);
}

TEST_CASE("noun-level splits") {
  const auto sentences = synthetic_wino(10, 10, 5);
  const auto a = split_winomt(sentences, 7);
  CHECK(a.size() == 25);
  CHECK(a == split_winomt(sentences, 7));
  std::map<std::pair<char, Split>, int> counts;
  for (const auto& [noun, split] : a) ++counts[{noun[0], split}];
  for (char c : {'f', 'm'}) {
    CHECK(counts[{c, Split::Train}] == 6);
    CHECK(counts[{c, Split::Dev}] == 2);
    CHECK(counts[{c, Split::Test}] == 2);
  }
  CHECK(counts[{'n', Split::Train}] == 3);

  const auto uneven = split_winomt(synthetic_wino(10, 12, 0), 1);
  std::map<std::pair<char, Split>, int> u;
  for (const auto& [noun, split] : uneven) ++u[{noun[0], split}];
  for (Split sp : {Split::Train, Split::Dev, Split::Test}) {
    CHECK(std::abs(u[{'f', sp}] - u[{'m', sp}]) <= 1);
  }

  CHECK_THROWS_AS(split_winomt(synthetic_wino(2, 10, 0), 1), InputError);
  CHECK_THROWS_AS(split_winomt(synthetic_wino(10, 14, 0), 1), InputError);
  auto unclassified = synthetic_wino(5, 5, 0);
  unclassified[0].bias_class.reset();
  CHECK_THROWS_AS(split_winomt(unclassified, 1), InputError);
  CHECK(split_from_string(to_string(Split::Dev)) == Split::Dev);
}

TEST_CASE("probe targets") {
  const auto s = parse_winomt(kWino);
  std::map<std::string, double> lex;
  for (const auto& n : reference_neutral_nouns()) lex[n.noun] = n.rgp_avg;
  lex["developer"] = 0.5;
  const auto t = build_probe_targets(s, lex);
  REQUIRE(t.size() == 3);
  CHECK(*t[0].bias == 0.5);
  CHECK(t[0].gender == std::vector<double>{1.0, -1.0});
  CHECK(t[1].gender == std::vector<double>{-1.0, 1.0});
  CHECK(*t[1].bias == doctest::Approx(-2.009));
  CHECK(t[2].gender == std::vector<double>{0.0});
  CHECK(build_probe_targets(s, lex, false)[0].gender.size() == 1);
  lex.erase("developer");
  CHECK_THROWS_AS(build_probe_targets(s, lex), InputError);
}

#include "gprobe/datasets.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gprobe/errors.hpp"

namespace gprobe {

namespace {

constexpr std::string_view kNounSlot = "{NOUN}";
constexpr std::string_view kPronounSlot = "{PRONOUN}";
constexpr std::string_view kPronoun2Slot = "{PRONOUN2}";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lowercased token with surrounding punctuation removed.
std::string bare_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  return lowercase(token.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

struct Piece {
  std::optional<SlotRole> role;
  std::string literal;
};

// Template text cut into literal pieces and slots.
std::vector<Piece> tokenize_template(const std::string& text) {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) {
      pieces.push_back({std::nullopt, text.substr(pos)});
      break;
    }
    if (open > pos) pieces.push_back({std::nullopt, text.substr(pos, open - pos)});
    const std::string_view rest = std::string_view(text).substr(open);
    if (rest.starts_with(kNounSlot)) {
      pieces.push_back({SlotRole::Noun, {}});
      pos = open + kNounSlot.size();
    } else if (rest.starts_with(kPronoun2Slot)) {
      pieces.push_back({SlotRole::Pronoun2, {}});
      pos = open + kPronoun2Slot.size();
    } else if (rest.starts_with(kPronounSlot)) {
      pieces.push_back({SlotRole::Pronoun, {}});
      pos = open + kPronounSlot.size();
    } else {
      throw InputError("template has an unknown slot: " + text);
    }
  }
  return pieces;
}

}  // namespace

std::string_view to_string(SlotRole role) {
  switch (role) {
    case SlotRole::Noun: return "noun";
    case SlotRole::Pronoun: return "pronoun";
    case SlotRole::Pronoun2: return "pronoun2";
  }
  return "noun";
}

void PromptTemplate::validate() const {
  if (count_occurrences(text, kNounSlot) != 1) {
    throw InputError("template needs exactly one noun slot: " + text);
  }
  if (count_occurrences(text, kPronounSlot) != 1) {
    throw InputError("template needs exactly one pronoun slot: " + text);
  }
  const auto second = count_occurrences(text, kPronoun2Slot);
  if (second > 1 || (second == 1) != pronoun2.has_value()) {
    throw InputError("second pronoun slot and its forms must come together: " + text);
  }
  if (pronoun.male.empty() || pronoun.female.empty()) {
    throw InputError("pronoun forms must not be empty: " + text);
  }
}

const std::vector<PromptTemplate>& standard_templates() {
  static const std::vector<PromptTemplate> templates = {
      {"{PRONOUN} is {NOUN}.", NounPosition::Predicate, {"He", "She"}, std::nullopt},
      {"{PRONOUN} was {NOUN}.", NounPosition::Predicate, {"He", "She"}, std::nullopt},
      {"{PRONOUN} works as {NOUN}.", NounPosition::Predicate, {"He", "She"}, std::nullopt},
      {"{PRONOUN} job is {NOUN}.", NounPosition::Predicate, {"His", "Her"}, std::nullopt},
      {"{NOUN} said that {PRONOUN} loves {PRONOUN2} job.", NounPosition::Subject, {"he", "she"},
       PronounForms{"his", "her"}},
      {"{NOUN} said that {PRONOUN} hates {PRONOUN2} job.", NounPosition::Subject, {"he", "she"},
       PronounForms{"his", "her"}},
  };
  return templates;
}

std::string noun_phrase(const LexiconEntry& entry, NounPosition position) {
  if (entry.article.empty()) {
    throw InputError("noun '" + entry.noun + "' has no determiner rule");
  }
  if (entry.article == "none") return entry.noun;
  if (entry.article != "a" && entry.article != "an") {
    throw InputError("noun '" + entry.noun + "' has unknown article '" + entry.article + "'");
  }
  return (position == NounPosition::Subject ? "the " : entry.article + " ") + entry.noun;
}

std::string make_prompt_id(std::string_view noun, int template_number) {
  return std::string(noun) + "#" + std::to_string(template_number);
}

std::pair<std::string, int> parse_prompt_id(std::string_view prompt_id) {
  const auto hash = prompt_id.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == prompt_id.size()) {
    throw InputError("malformed prompt id '" + std::string(prompt_id) + "'");
  }
  int number = 0;
  const auto digits = prompt_id.substr(hash + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || number < 1) {
    throw InputError("malformed prompt id '" + std::string(prompt_id) + "'");
  }
  return {std::string(prompt_id.substr(0, hash)), number};
}

std::vector<PromptInstance> generate_prompt_instances(const std::vector<LexiconEntry>& nouns,
                                                      const std::vector<PromptTemplate>& templates,
                                                      std::string_view mask_token) {
  if (mask_token.empty()) throw InputError("mask token must not be empty");
  for (const auto& t : templates) t.validate();

  struct Variant {
    PromptVariant kind;
    std::optional<GenderLabel> gender;
  };
  const Variant variants[] = {
      {PromptVariant::NounRevealed, std::nullopt},
      {PromptVariant::BothMasked, std::nullopt},
      {PromptVariant::PronounRevealed, GenderLabel::Female},
      {PromptVariant::PronounRevealed, GenderLabel::Male},
  };

  std::vector<PromptInstance> out;
  out.reserve(nouns.size() * templates.size() * 4);
  for (const auto& entry : nouns) {
    for (std::size_t ti = 0; ti < templates.size(); ++ti) {
      const PromptTemplate& t = templates[ti];
      const auto pieces = tokenize_template(t.text);
      const std::string phrase = noun_phrase(entry, t.position);
      for (const Variant& v : variants) {
        PromptInstance inst;
        inst.noun = entry.noun;
        inst.template_number = static_cast<int>(ti) + 1;
        inst.prompt_id = make_prompt_id(entry.noun, inst.template_number);
        inst.variant = v.kind;
        inst.revealed_gender = v.gender;
        for (const Piece& p : pieces) {
          if (!p.role) {
            inst.text += p.literal;
            continue;
          }
          const bool at_start = inst.text.empty();
          const bool is_noun = *p.role == SlotRole::Noun;
          const bool masked = is_noun ? v.kind != PromptVariant::NounRevealed
                                      : v.kind != PromptVariant::PronounRevealed;
          const PronounForms* forms =
              is_noun ? nullptr : (*p.role == SlotRole::Pronoun ? &t.pronoun : &*t.pronoun2);
          if (masked) {
            MaskSlot slot;
            slot.role = *p.role;
            slot.char_begin = inst.text.size();
            inst.text += mask_token;
            slot.char_end = inst.text.size();
            if (forms) slot.forms = *forms;
            inst.masks.push_back(std::move(slot));
          } else if (is_noun) {
            inst.text += at_start ? capitalize(phrase) : phrase;
          } else {
            inst.text += *v.gender == GenderLabel::Male ? forms->male : forms->female;
          }
        }
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

void save_prompt_manifest(const std::filesystem::path& path,
                          const std::vector<PromptInstance>& instances,
                          std::string_view mask_token) {
  nlohmann::json doc;
  doc["mask_token"] = std::string(mask_token);
  doc["scored_slot"] = "pronoun";
  auto& arr = doc["instances"] = nlohmann::json::array();
  for (const auto& inst : instances) {
    nlohmann::json j{{"prompt_id", inst.prompt_id},
                     {"noun", inst.noun},
                     {"template", inst.template_number},
                     {"variant", std::string(to_string(inst.variant))},
                     {"text", inst.text}};
    if (inst.revealed_gender) j["revealed_gender"] = std::string(to_string(*inst.revealed_gender));
    auto& masks = j["masks"] = nlohmann::json::array();
    for (const auto& m : inst.masks) {
      nlohmann::json mj{{"role", std::string(to_string(m.role))},
                        {"begin", m.char_begin},
                        {"end", m.char_end}};
      if (m.forms) mj["forms"] = {{"male", m.forms->male}, {"female", m.forms->female}};
      masks.push_back(std::move(mj));
    }
    arr.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write prompt manifest " + path.string());
  out << doc.dump(1) << '\n';
}

// ---------------------------------------------------------------------------

std::string_view to_string(FactualGender g) {
  switch (g) {
    case FactualGender::Female: return "female";
    case FactualGender::Male: return "male";
    case FactualGender::Neutral: return "neutral";
  }
  return "neutral";
}

FactualGender factual_gender_from_string(std::string_view name) {
  const auto lower = lowercase(name);
  if (lower == "female") return FactualGender::Female;
  if (lower == "male") return FactualGender::Male;
  if (lower == "neutral") return FactualGender::Neutral;
  throw InputError("unknown gender '" + std::string(name) + "'");
}

double pronoun_gender_value(std::string_view pronoun) {
  static const std::map<std::string, double, std::less<>> values = {
      {"she", -1.0}, {"her", -1.0}, {"hers", -1.0}, {"herself", -1.0},
      {"he", 1.0},   {"him", 1.0},  {"his", 1.0},   {"himself", 1.0},
      {"they", 0.0}, {"them", 0.0}, {"their", 0.0}, {"theirs", 0.0}, {"themselves", 0.0},
  };
  const auto it = values.find(lowercase(pronoun));
  if (it == values.end()) throw InputError("'" + std::string(pronoun) + "' is not a personal pronoun");
  return it->second;
}

namespace {

bool is_pronoun(const std::string& bare) {
  try {
    pronoun_gender_value(bare);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

std::string opposite_pronoun(const std::string& p) {
  static const std::map<std::string, std::string> swap = {
      {"she", "he"},   {"he", "she"},       {"her", "his"},         {"his", "her"},
      {"him", "her"},  {"hers", "his"},     {"herself", "himself"}, {"himself", "herself"},
  };
  const auto it = swap.find(p);
  return it == swap.end() ? std::string{} : it->second;
}

}  // namespace

std::vector<WinoSentence> parse_winomt(std::string_view content,
                                       const std::map<std::string, BiasClass>* classes) {
  std::vector<WinoSentence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto where = "WinoMT line " + std::to_string(line_no);
    std::vector<std::string_view> fields;
    for (std::size_t b = 0;;) {
      const auto tab = line.find('\t', b);
      fields.push_back(line.substr(b, tab == std::string_view::npos ? tab : tab - b));
      if (tab == std::string_view::npos) break;
      b = tab + 1;
    }
    if (fields.size() != 4) {
      throw InputError(where + ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }

    WinoSentence s;
    s.id = static_cast<std::uint32_t>(out.size());
    s.raw_gender = std::string(fields[0]);
    s.raw_index = std::string(fields[1]);
    s.text = std::string(fields[2]);
    s.noun = std::string(fields[3]);
    try {
      s.gold = factual_gender_from_string(fields[0]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), index);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
      throw InputError(where + ": entity index '" + s.raw_index + "' is not a number");
    }
    if (s.noun.empty()) throw InputError(where + ": empty profession");

    const auto tokens = split_whitespace(s.text);
    const auto noun_len = split_whitespace(s.noun).size();
    if (index + noun_len > tokens.size()) {
      throw InputError(where + ": entity index " + s.raw_index + " out of range for " +
                       std::to_string(tokens.size()) + " tokens");
    }
    s.noun_span = {index, index + noun_len};

    bool found = false;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (k >= s.noun_span.begin && k < s.noun_span.end) continue;
      const auto bare = bare_token(tokens[k]);
      if (is_pronoun(bare)) {
        s.pronoun = bare;
        s.pronoun_span = {k, k + 1};
        found = true;
        break;
      }
    }
    if (!found) throw InputError(where + ": no personal pronoun in sentence");

    if (classes) {
      const auto it = classes->find(s.noun);
      if (it != classes->end()) s.bias_class = it->second;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<WinoSentence> load_winomt(const std::filesystem::path& path,
                                      const std::map<std::string, BiasClass>* classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WinoMT file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_winomt(buf.str(), classes);
}

std::string serialize_winomt(const std::vector<WinoSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += s.raw_gender.empty() ? std::string(to_string(s.gold)) : s.raw_gender;
    out += '\t';
    out += s.raw_index.empty() ? std::to_string(s.noun_span.begin) : s.raw_index;
    out += '\t';
    out += s.text;
    out += '\t';
    out += s.noun;
    out += '\n';
  }
  return out;
}

namespace {

// `replacement` wrapped in the leading punctuation of `first` and the
// trailing punctuation of `last`.
std::string keep_punctuation(const std::string& first, const std::string& last,
                             const std::string& replacement) {
  std::size_t lead = 0;
  while (lead < first.size() && std::ispunct(static_cast<unsigned char>(first[lead]))) ++lead;
  std::size_t trail = last.size();
  while (trail > 0 && std::ispunct(static_cast<unsigned char>(last[trail - 1]))) --trail;
  return first.substr(0, lead) + replacement + last.substr(trail);
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string match_case(const std::string& like, const std::string& word) {
  const auto core = like.find_first_not_of("\"'([");
  if (core != std::string::npos && std::isupper(static_cast<unsigned char>(like[core]))) {
    return capitalize(word);
  }
  return word;
}

}  // namespace

WinoVariants winomt_variants(const WinoSentence& s, std::string_view mask_token,
                             bool include_swapped) {
  const auto tokens = split_whitespace(s.text);
  if (s.noun_span.end > tokens.size() || s.pronoun_span.end > tokens.size() ||
      s.noun_span.begin >= s.noun_span.end) {
    throw InputError("sentence " + std::to_string(s.id) + ": spans out of range");
  }
  TokenSpan noun = s.noun_span;
  if (noun.begin > 0) {
    const auto det = bare_token(tokens[noun.begin - 1]);
    if (det == "the" || det == "a" || det == "an") --noun.begin;
  }
  const std::string mask(mask_token);
  const std::size_t p = s.pronoun_span.begin;
  auto render = [&](const std::string& pronoun_text, bool mask_noun) {
    std::vector<std::string> toks = tokens;
    toks[p] = keep_punctuation(tokens[p], tokens[p], pronoun_text);
    if (mask_noun) {
      toks[noun.begin] = keep_punctuation(tokens[noun.begin], tokens[noun.end - 1], mask);
      toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(noun.begin + 1),
                 toks.begin() + static_cast<std::ptrdiff_t>(noun.end));
    }
    return join(toks);
  };
  WinoVariants v;
  v.noun_revealed = render(mask, false);
  v.both_masked = render(mask, true);
  const std::string& original = tokens[s.pronoun_span.begin];
  v.pronoun_revealed.push_back(render(match_case(original, s.pronoun), true));
  if (include_swapped) {
    const auto other = opposite_pronoun(s.pronoun);
    if (!other.empty()) v.pronoun_revealed.push_back(render(match_case(original, other), true));
  }
  return v;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw InputError("unknown split '" + std::string(name) + "'");
}

SplitAssignment split_winomt(const std::vector<WinoSentence>& sentences, std::uint64_t seed) {
  std::map<BiasClass, std::set<std::string>> by_class;
  std::map<std::string, BiasClass> noun_class;
  for (const auto& s : sentences) {
    if (!s.bias_class) throw InputError("noun '" + s.noun + "' has no bias class");
    const auto [it, inserted] = noun_class.emplace(s.noun, *s.bias_class);
    if (!inserted && it->second != *s.bias_class) {
      throw InputError("noun '" + s.noun + "' has conflicting bias classes");
    }
    by_class[*s.bias_class].insert(s.noun);
  }
  const std::size_t n_female = by_class[BiasClass::Female].size();
  const std::size_t n_male = by_class[BiasClass::Male].size();
  if (n_female < 3 || n_male < 3) {
    throw InputError("each biased class needs at least 3 nouns (female " +
                     std::to_string(n_female) + ", male " + std::to_string(n_male) + ")");
  }
  const std::size_t paired = std::min(n_female, n_male);
  const std::size_t surplus = std::max(n_female, n_male) - paired;
  if (surplus > 3) {
    throw InputError("male- and female-biased noun counts differ by more than 3; cannot balance");
  }

  auto quotas = [](std::size_t n) {
    const auto train = static_cast<std::size_t>(std::lround(0.6 * static_cast<double>(n)));
    const auto dev = std::min(n - train, static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(n))));
    return std::array<std::size_t, 3>{train, dev, n - train - dev};
  };

  std::mt19937_64 rng(seed);
  SplitAssignment out;
  for (BiasClass cls : {BiasClass::Female, BiasClass::Male, BiasClass::Neutral}) {
    std::vector<std::string> nouns(by_class[cls].begin(), by_class[cls].end());
    std::shuffle(nouns.begin(), nouns.end(), rng);
    const bool biased = cls != BiasClass::Neutral;
    const auto q = quotas(biased ? paired : nouns.size());
    std::size_t k = 0;
    for (std::size_t split = 0; split < 3; ++split) {
      for (std::size_t j = 0; j < q[split]; ++j) out[nouns[k++]] = static_cast<Split>(split);
    }
    // Surplus nouns of the larger biased class go one per split, test first.
    for (std::size_t split = 2; k < nouns.size(); --split) out[nouns[k++]] = static_cast<Split>(split);
  }
  return out;
}

std::vector<ProbeTargets> build_probe_targets(const std::vector<WinoSentence>& sentences,
                                              const std::map<std::string, double>& bias_lexicon,
                                              bool include_swapped) {
  std::vector<ProbeTargets> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    const auto it = bias_lexicon.find(s.noun);
    if (it == bias_lexicon.end()) {
      throw InputError("no bias value for noun '" + s.noun + "' (sentence " + std::to_string(s.id) + ")");
    }
    ProbeTargets t;
    t.sentence_id = s.id;
    t.bias = it->second;
    t.gender.push_back(pronoun_gender_value(s.pronoun));
    if (include_swapped) {
      const auto other = opposite_pronoun(s.pronoun);
      if (!other.empty()) t.gender.push_back(pronoun_gender_value(other));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace gprobe

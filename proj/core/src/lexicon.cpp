#include "gprobe/lexicon.hpp"

#include <fstream>

#include "json.hpp"

#include "gprobe/errors.hpp"

namespace gprobe {

namespace {

// Per-model RGP (BERT base, BERT large, ELECTRA), their average, per-model
// bias classes and the annotated class of the 104 gender-neutral nouns.
const std::vector<NeutralNoun> kNeutral = {
    {"housekeeper", "a", {-2.813, -0.573, -2.642}, -2.009, {BiasClass::Female, BiasClass::Female, BiasClass::Female}, BiasClass::Female},
    {"nurse", "a", {-2.85, -0.568, -2.103}, -1.84, {BiasClass::Female, BiasClass::Female, BiasClass::Female}, BiasClass::Female},
    {"receptionist", "a", {-1.728, -0.776, -2.302}, -1.602, {BiasClass::Female, BiasClass::Female, BiasClass::Female}, BiasClass::Female},
    {"hairdresser", "a", {-0.4, -0.228, -0.785}, -0.471, {BiasClass::Female, BiasClass::Female, BiasClass::Female}, BiasClass::Female},
    {"librarian", "a", {0.019, -0.088, -0.768}, -0.279, {BiasClass::Neutral, BiasClass::Female, BiasClass::Female}, BiasClass::Female},
    {"assistant", "an", {-0.477, 0.02, -0.117}, -0.192, {BiasClass::Female, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"secretary", "a", {-0.564, 0.024, -0.027}, -0.189, {BiasClass::Female, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"victim", "a", {-0.075, 0.091, -0.323}, -0.102, {BiasClass::Female, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"teacher", "a", {0.129, 0.175, -0.595}, -0.097, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Female},
    {"therapist", "a", {0.002, 0.016, -0.233}, -0.072, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"child", "a", {-0.1, 0.073, -0.154}, -0.06, {BiasClass::Female, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"salesperson", "a", {-0.68, -0.206, 0.719}, -0.056, {BiasClass::Female, BiasClass::Female, BiasClass::Male}, BiasClass::Male},
    {"practitioner", "a", {0.15, 0.361, -0.621}, -0.037, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"client", "a", {-0.157, 0.25, -0.165}, -0.024, {BiasClass::Female, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"dietitian", "a", {0.175, 0.003, -0.143}, 0.012, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"cook", "a", {-0.15, 0.141, 0.048}, 0.013, {BiasClass::Female, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"educator", "an", {0.278, 0.144, -0.375}, 0.015, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"cashier", "a", {0.009, 0.041, 0.017}, 0.023, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"customer", "a", {-0.401, 0.328, 0.142}, 0.023, {BiasClass::Female, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"attendant", "an", {-0.157, 0.226, 0.01}, 0.027, {BiasClass::Female, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"designer", "a", {0.2, 0.173, -0.232}, 0.047, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Female},
    {"cleaner", "a", {0.151, 0.099, -0.089}, 0.053, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"teenager", "a", {0.343, 0.088, -0.21}, 0.074, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"passenger", "a", {0.015, 0.151, 0.1}, 0.089, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"guest", "a", {0.162, 0.258, -0.15}, 0.09, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"someone", "none", {0.026, 0.275, 0.082}, 0.128, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"student", "a", {0.307, 0.281, -0.195}, 0.131, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"clerk", "a", {0.107, 0.216, 0.105}, 0.143, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"visitor", "a", {0.471, 0.273, -0.28}, 0.155, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"counselor", "a", {0.304, 0.165, 0.009}, 0.159, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"editor", "an", {0.244, 0.161, 0.081}, 0.162, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"resident", "a", {0.528, 0.3, -0.304}, 0.174, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Female}, BiasClass::Neutral},
    {"patient", "a", {0.009, 0.305, 0.217}, 0.177, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"homeowner", "a", {0.422, 0.158, -0.002}, 0.192, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"advisee", "an", {0.175, 0.252, 0.168}, 0.199, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"psychologist", "a", {0.259, 0.232, 0.124}, 0.205, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"nutritionist", "a", {0.474, 0.134, 0.02}, 0.21, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"dispatcher", "a", {0.25, 0.118, 0.284}, 0.217, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"tailor", "a", {0.572, 0.382, -0.25}, 0.235, {BiasClass::Neutral, BiasClass::Male, BiasClass::Female}, BiasClass::Female},
    {"employee", "an", {0.124, 0.228, 0.371}, 0.241, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"owner", "an", {0.044, 0.213, 0.493}, 0.25, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"advisor", "an", {0.339, 0.271, 0.148}, 0.253, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"witness", "a", {0.287, 0.319, 0.187}, 0.264, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"writer", "a", {0.497, 0.237, 0.06}, 0.265, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"undergraduate", "an", {0.575, 0.148, 0.075}, 0.266, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"veterinarian", "a", {0.616, 0.007, 0.209}, 0.278, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"pedestrian", "a", {0.446, 0.226, 0.17}, 0.281, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"investigator", "an", {0.518, 0.228, 0.12}, 0.289, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"hygienist", "a", {0.665, 0.274, -0.04}, 0.3, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"buyer", "a", {0.529, 0.19, 0.183}, 0.3, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"supervisor", "a", {0.257, 0.228, 0.426}, 0.304, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"worker", "a", {0.151, 0.267, 0.511}, 0.31, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"bystander", "a", {0.786, 0.117, 0.072}, 0.325, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"chemist", "a", {0.579, 0.311, 0.107}, 0.332, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"administrator", "an", {0.428, 0.236, 0.35}, 0.338, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"examiner", "an", {0.445, 0.281, 0.296}, 0.341, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"broker", "a", {0.376, 0.358, 0.295}, 0.343, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"instructor", "an", {0.413, 0.196, 0.436}, 0.348, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"developer", "a", {0.536, 0.338, 0.172}, 0.349, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"technician", "a", {0.312, 0.362, 0.4}, 0.358, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"baker", "a", {0.622, 0.287, 0.178}, 0.362, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"planner", "a", {0.611, 0.341, 0.147}, 0.366, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"bartender", "a", {0.628, 0.282, 0.293}, 0.401, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"paramedic", "a", {0.787, 0.094, 0.333}, 0.405, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"protester", "a", {0.722, 0.498, 0.019}, 0.413, {BiasClass::Neutral, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"specialist", "a", {0.501, 0.363, 0.392}, 0.419, {BiasClass::Neutral, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"electrician", "an", {0.935, 0.283, 0.076}, 0.431, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"physician", "a", {0.438, 0.359, 0.502}, 0.433, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"pathologist", "a", {0.817, 0.307, 0.181}, 0.435, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"analyst", "an", {0.645, 0.315, 0.361}, 0.44, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"appraiser", "an", {0.729, 0.305, 0.302}, 0.445, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"onlooker", "an", {0.978, 0.093, 0.274}, 0.448, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"janitor", "a", {0.702, 0.493, 0.174}, 0.456, {BiasClass::Neutral, BiasClass::Male, BiasClass::Neutral}, BiasClass::Male},
    {"mover", "a", {0.717, 0.407, 0.253}, 0.459, {BiasClass::Neutral, BiasClass::Male, BiasClass::Neutral}, BiasClass::Male},
    {"chef", "a", {0.682, 0.348, 0.352}, 0.46, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"lawyer", "a", {0.696, 0.271, 0.421}, 0.462, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Male},
    {"paralegal", "a", {0.829, 0.247, 0.313}, 0.463, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"doctor", "a", {0.723, 0.355, 0.322}, 0.467, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"auditor", "an", {0.654, 0.329, 0.504}, 0.496, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Female},
    {"officer", "an", {0.465, 0.463, 0.584}, 0.504, {BiasClass::Neutral, BiasClass::Male, BiasClass::Male}, BiasClass::Neutral},
    {"surgeon", "a", {0.368, 0.417, 0.733}, 0.506, {BiasClass::Neutral, BiasClass::Male, BiasClass::Male}, BiasClass::Neutral},
    {"programmer", "a", {0.543, 0.304, 0.684}, 0.51, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Neutral},
    {"scientist", "a", {0.568, 0.427, 0.548}, 0.514, {BiasClass::Neutral, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"painter", "a", {0.721, 0.298, 0.555}, 0.525, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Neutral},
    {"pharmacist", "a", {0.862, 0.244, 0.495}, 0.534, {BiasClass::Male, BiasClass::Neutral, BiasClass::Neutral}, BiasClass::Neutral},
    {"laborer", "a", {0.996, 0.557, 0.058}, 0.537, {BiasClass::Male, BiasClass::Male, BiasClass::Neutral}, BiasClass::Male},
    {"machinist", "a", {0.821, 0.449, 0.361}, 0.544, {BiasClass::Male, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"architect", "an", {0.79, 0.243, 0.609}, 0.547, {BiasClass::Male, BiasClass::Neutral, BiasClass::Male}, BiasClass::Neutral},
    {"taxpayer", "a", {0.785, 0.525, 0.339}, 0.55, {BiasClass::Male, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"chief", "a", {0.595, 0.472, 0.628}, 0.565, {BiasClass::Neutral, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
    {"inspector", "an", {0.631, 0.344, 0.726}, 0.567, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Neutral},
    {"plumber", "a", {1.186, 0.468, 0.205}, 0.62, {BiasClass::Male, BiasClass::Male, BiasClass::Neutral}, BiasClass::Neutral},
    {"construction worker", "a", {0.77, 0.326, 0.769}, 0.622, {BiasClass::Male, BiasClass::Neutral, BiasClass::Male}, BiasClass::Male},
    {"driver", "a", {0.847, 0.415, 0.603}, 0.622, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
    {"manager", "a", {0.456, 0.346, 1.084}, 0.628, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Male},
    {"engineer", "an", {0.562, 0.385, 0.987}, 0.645, {BiasClass::Neutral, BiasClass::Male, BiasClass::Male}, BiasClass::Neutral},
    {"sheriff", "a", {0.85, 0.396, 0.708}, 0.651, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
    {"CEO", "a", {0.701, 0.353, 0.989}, 0.681, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Male},
    {"mechanic", "a", {0.752, 0.307, 1.098}, 0.719, {BiasClass::Male, BiasClass::Neutral, BiasClass::Male}, BiasClass::Male},
    {"guard", "a", {0.907, 0.586, 0.72}, 0.738, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
    {"accountant", "an", {0.61, 0.291, 1.35}, 0.75, {BiasClass::Neutral, BiasClass::Neutral, BiasClass::Male}, BiasClass::Female},
    {"farmer", "a", {1.044, 0.477, 0.736}, 0.753, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
    {"firefighter", "a", {1.294, 0.438, 0.604}, 0.779, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Neutral},
    {"carpenter", "a", {0.934, 0.415, 1.263}, 0.87, {BiasClass::Male, BiasClass::Male, BiasClass::Male}, BiasClass::Male},
};

const std::vector<GenderedNoun> kGendered = {
    {"councilwoman", "a", GenderLabel::Female, {-4.262, -2.05, -0.832}, -2.381},
    {"policewoman", "a", GenderLabel::Female, {-4.428, -1.71, -0.928}, -2.355},
    {"princess", "a", GenderLabel::Female, {-3.486, -1.598, -1.734}, -2.273},
    {"actress", "an", GenderLabel::Female, {-3.315, -1.094, -2.319}, -2.242},
    {"chairwoman", "a", GenderLabel::Female, {-4.02, -1.818, -0.629}, -2.156},
    {"waitress", "a", GenderLabel::Female, {-2.806, -1.167, -2.475}, -2.15},
    {"businesswoman", "a", GenderLabel::Female, {-3.202, -1.696, -1.096}, -1.998},
    {"queen", "a", GenderLabel::Female, {-2.752, -0.91, -2.246}, -1.969},
    {"spokeswoman", "a", GenderLabel::Female, {-2.543, -2.126, -1.017}, -1.895},
    {"stewardess", "a", GenderLabel::Female, {-3.484, -2.215, 0.089}, -1.87},
    {"maid", "a", GenderLabel::Female, {-3.092, -0.822, -1.452}, -1.788},
    {"witch", "a", GenderLabel::Female, {-2.068, -0.706, -1.476}, -1.416},
    {"nun", "a", GenderLabel::Female, {-2.472, -0.974, -0.613}, -1.353},
    {"wizard", "a", GenderLabel::Male, {0.972, 0.314, 0.237}, 0.508},
    {"manservant", "a", GenderLabel::Male, {0.974, 0.493, 0.115}, 0.527},
    {"steward", "a", GenderLabel::Male, {0.737, 0.495, 0.675}, 0.636},
    {"spokesman", "a", GenderLabel::Male, {0.846, 0.591, 0.515}, 0.651},
    {"waiter", "a", GenderLabel::Male, {1.003, 0.473, 0.639}, 0.705},
    {"priest", "a", GenderLabel::Male, {0.988, 0.442, 0.928}, 0.786},
    {"actor", "an", GenderLabel::Male, {1.366, 0.392, 0.632}, 0.797},
    {"prince", "a", GenderLabel::Male, {1.401, 0.776, 0.418}, 0.865},
    {"policeman", "a", GenderLabel::Male, {1.068, 0.514, 1.202}, 0.928},
    {"king", "a", GenderLabel::Male, {1.399, 0.658, 0.772}, 0.943},
    {"chairman", "a", GenderLabel::Male, {1.14, 0.677, 1.069}, 0.962},
    {"councilman", "a", GenderLabel::Male, {1.609, 1.04, 0.419}, 1.023},
    {"businessman", "a", GenderLabel::Male, {1.829, 0.549, 0.985}, 1.121},
};
}  // namespace

std::string_view to_string(BiasClass cls) {
  switch (cls) {
    case BiasClass::Female: return "female";
    case BiasClass::Neutral: return "neutral";
    case BiasClass::Male: return "male";
  }
  return "neutral";
}

BiasClass bias_class_from_string(std::string_view name) {
  if (name == "female") return BiasClass::Female;
  if (name == "neutral") return BiasClass::Neutral;
  if (name == "male") return BiasClass::Male;
  throw InputError("unknown bias class '" + std::string(name) + "'");
}

const std::vector<NeutralNoun>& reference_neutral_nouns() { return kNeutral; }

const std::vector<GenderedNoun>& reference_gendered_nouns() { return kGendered; }

NounLexicon reference_lexicon() { return to_lexicon(reference_entries()); }

std::map<std::string, double> reference_biases(ReferenceModel model) {
  const auto k = static_cast<std::size_t>(model);
  std::map<std::string, double> out;
  for (const auto& n : kNeutral) out[n.noun] = n.rgp[k];
  for (const auto& n : kGendered) out[n.noun] = n.rgp[k];
  return out;
}

std::vector<LexiconEntry> reference_entries() {
  std::vector<LexiconEntry> out;
  for (const auto& n : kNeutral) out.push_back({n.noun, n.article, n.annotated, std::nullopt});
  for (const auto& n : kGendered) out.push_back({n.noun, n.article, std::nullopt, n.gender});
  return out;
}

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("lexicon " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw InputError("lexicon " + path.string() + ": expected a JSON array");
  std::vector<LexiconEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "lexicon entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("noun") || !e["noun"].is_string()) {
      throw InputError(where + ": missing noun");
    }
    LexiconEntry entry;
    entry.noun = e["noun"].get<std::string>();
    if (entry.noun.empty()) throw InputError(where + ": empty noun");
    entry.article = e.value("article", std::string{});
    if (e.contains("class")) entry.bias_class = bias_class_from_string(e["class"].get<std::string>());
    if (e.contains("gender")) {
      const auto g = e["gender"].get<std::string>();
      if (g == "female") entry.gender = GenderLabel::Female;
      else if (g == "male") entry.gender = GenderLabel::Male;
      else throw InputError(where + ": unknown gender '" + g + "'");
    }
    if (entry.bias_class.has_value() == entry.gender.has_value()) {
      throw InputError(where + ": exactly one of class and gender is required");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

void save_lexicon(const std::filesystem::path& path, const std::vector<LexiconEntry>& entries) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j{{"noun", e.noun}, {"article", e.article}};
    if (e.bias_class) j["class"] = std::string(to_string(*e.bias_class));
    if (e.gender) j["gender"] = std::string(to_string(*e.gender));
    doc.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write lexicon " + path.string());
  out << doc.dump(2) << '\n';
}

NounLexicon to_lexicon(const std::vector<LexiconEntry>& entries) {
  NounLexicon lex;
  for (const auto& e : entries) {
    if (e.gender) lex.gendered[e.noun] = *e.gender;
    else lex.gender_neutral.insert(e.noun);
  }
  lex.validate();
  return lex;
}

}  // namespace gprobe

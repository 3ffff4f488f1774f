#include "gprobe/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gprobe/checksum.hpp"
#include "gprobe/datasets.hpp"
#include "gprobe/edump_io.hpp"
#include "gprobe/errors.hpp"
#include "gprobe/lexicon.hpp"

namespace gprobe::cli {

namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void ensure_dir(const Path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<LexiconEntry> lexicon_entries(const std::optional<Path>& path) {
  return path ? load_lexicon(*path) : reference_entries();
}

json evaluation_json(const std::optional<ProbeEvaluation>& e) {
  if (!e) return nullptr;
  return {{"pearson", e->pearson}, {"mae", e->mae}, {"count", e->count}};
}

json history_json(const TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"dev_loss", e.dev_loss},
                      {"lr", e.lr},
                      {"defect", e.defect},
                      {"improved", e.improved}});
  }
  return {{"epochs", epochs},
          {"stop", std::string(to_string(h.stop))},
          {"best_epoch", h.best_epoch},
          {"decays", h.decays},
          {"pre_projection_defect", h.pre_projection_defect},
          {"post_projection_defect", h.post_projection_defect}};
}

std::optional<ProbeEvaluation> try_evaluate(const JointProbe& probe,
                                            const std::vector<ProbeSample>& samples, Task task) {
  const bool any = std::any_of(samples.begin(), samples.end(),
                               [&](const ProbeSample& s) { return s.task == task; });
  if (!any) return std::nullopt;
  try {
    return evaluate_probe(probe, samples, task);
  } catch (const NumericalError&) {
    return std::nullopt;  // correlation undefined on this split
  }
}

BiasAggregate aggregate_file(const Path& path, const NounLexicon& lexicon) {
  try {
    return aggregate(read_noun_bias_csv(path), lexicon);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

// gen-synth ------------------------------------------------------------------

GenSynthResult cmd_gen_synth(const GenSynthOptions& o) {
  if (!(o.baseline_scale >= 0.0) || !std::isfinite(o.baseline_scale)) {
    throw InputError("baseline scale must be >= 0");
  }
  const SynthData data = generate_synthetic(o.synth);
  ensure_dir(o.out_dir);
  const auto d = static_cast<std::size_t>(o.synth.d);
  const std::size_t n = data.samples.size();

  DumpManifest m;
  m.model_id = o.model_id;
  m.tokenizer_id = "none";
  m.d_emb = static_cast<std::uint32_t>(d);
  m.layers = {o.layer};

  std::mt19937_64 rng(o.synth.seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<EmbeddingRecord> records;
  records.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const ProbeSample& s = data.samples[k];
    const bool bias = s.task == Task::Bias;
    SentenceEntry entry;
    entry.id = s.sentence_id;
    entry.text = "synthetic sample " + std::to_string(k);
    entry.noun = "synthetic";
    entry.variants = {"both_masked", bias ? "noun_revealed" : "pronoun_revealed"};
    entry.split = 10 * k < 6 * n ? Split::Train : (10 * k < 8 * n ? Split::Dev : Split::Test);
    m.sentences.push_back(std::move(entry));

    ProbeTargets t;
    t.sentence_id = s.sentence_id;
    if (bias) t.bias = s.target;
    else t.gender = {s.target};
    m.targets.push_back(std::move(t));

    EmbeddingRecord base{s.sentence_id, RecordVariant::Baseline,
                         bias ? RecordRole::Pronoun : RecordRole::Noun, o.layer,
                         std::vector<float>(d)};
    EmbeddingRecord signal{s.sentence_id,
                           bias ? RecordVariant::NounRevealed : RecordVariant::PronounRevealed,
                           base.role, o.layer, std::vector<float>(d)};
    for (std::size_t j = 0; j < d; ++j) {
      const double b = o.baseline_scale * normal(rng);
      base.vector[j] = static_cast<float>(b);
      signal.vector[j] = static_cast<float>(b + s.delta[static_cast<Index>(j)]);
    }
    records.push_back(std::move(base));
    records.push_back(std::move(signal));
  }

  GenSynthResult r;
  r.dump = o.out_dir / "synth.gedt";
  r.crc = write_dump(r.dump, records, m);
  r.records = records.size();

  const auto& t = data.truth;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json truth{{"d", o.synth.d},
             {"k_bias", o.synth.k_bias},
             {"k_gender", o.synth.k_gender},
             {"k_shared", o.synth.k_shared},
             {"n_samples", o.synth.n_samples},
             {"noise_sigma", o.synth.noise_sigma},
             {"nuisance_sigma", o.synth.nuisance_sigma},
             {"seed", o.synth.seed},
             {"bias_support", t.bias_support},
             {"gender_support", t.gender_support},
             {"bias_direction", vec(t.bias_direction())},
             {"gender_direction", vec(t.gender_direction())}};
  r.truth = o.out_dir / "truth.json";
  write_text_file(r.truth, truth.dump(1) + "\n");
  return r;
}

// make-prompts ---------------------------------------------------------------

std::size_t cmd_make_prompts(const MakePromptsOptions& o) {
  const auto entries = lexicon_entries(o.lexicon);
  const auto instances = generate_prompt_instances(entries, standard_templates(), o.mask_token);
  save_prompt_manifest(o.out, instances, o.mask_token);
  if (o.lexicon_out) save_lexicon(*o.lexicon_out, entries);
  return instances.size();
}

// eval-bias ------------------------------------------------------------------

EvalBiasResult cmd_eval_bias(const EvalBiasOptions& o) {
  const auto probs = read_probability_csv(o.probs);
  std::map<std::string, const PronounProbs*> revealed, baseline;
  for (const auto& p : probs) {
    auto* slot = p.variant == PromptVariant::NounRevealed ? &revealed
                 : p.variant == PromptVariant::BothMasked ? &baseline
                                                          : nullptr;
    if (!slot) continue;
    if (!slot->emplace(p.prompt_id, &p).second) {
      throw InputError("duplicate " + std::string(to_string(p.variant)) + " record for prompt '" +
                       p.prompt_id + "'");
    }
  }
  if (revealed.empty()) throw InputError("no noun_revealed records in " + o.probs.string());

  std::map<std::string, std::vector<RgpRecord>> per_noun;
  for (const auto& [id, p] : revealed) {
    const auto it = baseline.find(id);
    if (it == baseline.end()) throw InputError("prompt '" + id + "' has no both_masked record");
    const auto [noun, tmpl] = parse_prompt_id(id);
    per_noun[noun].push_back({noun, id, rgp(*p, *it->second)});
  }

  const auto entries = lexicon_entries(o.lexicon);
  std::map<std::string, const LexiconEntry*> entry_of;
  for (const auto& e : entries) entry_of[e.noun] = &e;

  EvalBiasResult r;
  std::map<std::string, double> neutral_biases, all_biases;
  for (const auto& [noun, recs] : per_noun) {
    const double b = noun_bias(recs);
    r.nouns[noun] = {b, recs.size()};
    all_biases[noun] = b;
    const auto it = entry_of.find(noun);
    if (it == entry_of.end() || !it->second->gender) neutral_biases[noun] = b;
  }
  r.lexicon = bias_lexicon_extract(neutral_biases, o.cap);

  ensure_dir(o.out_dir);
  const std::set<std::string> male(r.lexicon.male_biased.begin(), r.lexicon.male_biased.end());
  const std::set<std::string> female(r.lexicon.female_biased.begin(), r.lexicon.female_biased.end());
  auto model_class = [&](const std::string& noun) -> std::string {
    const auto it = entry_of.find(noun);
    if (it != entry_of.end() && it->second->gender) {
      return "gendered_" + std::string(to_string(*it->second->gender));
    }
    return male.count(noun) ? "male" : female.count(noun) ? "female" : "neutral";
  };
  std::string csv = "noun,rgp,prompts,class\n";
  for (const auto& [noun, nb] : r.nouns) {
    csv += csv_escape(noun) + "," + format_number(nb.rgp) + "," + std::to_string(nb.prompts) + "," +
           model_class(noun) + "\n";
  }
  write_text_file(o.out_dir / "noun_bias.csv", csv);

  json lex{{"male_biased", r.lexicon.male_biased},
           {"female_biased", r.lexicon.female_biased},
           {"biases", all_biases}};
  write_text_file(o.out_dir / "bias_lexicon.json", lex.dump(1) + "\n");

  auto annotated = [&](const std::string& noun) -> std::string {
    const auto it = entry_of.find(noun);
    if (it == entry_of.end() || !it->second->bias_class) return "-";
    return std::string(to_string(*it->second->bias_class));
  };
  std::string md = "| Most female biased | RGP | Annotated | Most male biased | RGP | Annotated |\n"
                   "|---|---|---|---|---|---|\n";
  const std::size_t rows = std::max(r.lexicon.female_biased.size(), r.lexicon.male_biased.size());
  for (std::size_t i = 0; i < rows; ++i) {
    auto cell = [&](const std::vector<std::string>& list) -> std::string {
      if (i >= list.size()) return "| | | ";
      const auto& noun = list[i];
      return "| " + noun + " | " + fixed(r.nouns.at(noun).rgp) + " | " + annotated(noun) + " ";
    };
    md += cell(r.lexicon.female_biased) + cell(r.lexicon.male_biased) + "|\n";
  }
  write_text_file(o.out_dir / "bias_report.md", md);
  return r;
}

std::map<std::string, double> read_noun_bias_csv(const Path& path) {
  const CsvTable table = parse_csv(read_text_file(path));
  const auto col = [&](const char* name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw InputError(path.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto noun_col = col("noun");
  const auto rgp_col = col("rgp");
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double v = parse_csv_number(row[rgp_col], table.line_numbers[r], "rgp");
    if (!std::isfinite(v)) throw InputError(path.string() + ": non-finite rgp for '" + row[noun_col] + "'");
    if (!out.emplace(row[noun_col], v).second) {
      throw InputError(path.string() + ": duplicate noun '" + row[noun_col] + "'");
    }
  }
  if (out.empty()) throw InputError(path.string() + ": no nouns");
  return out;
}

// prepare-winomt -------------------------------------------------------------

PrepareWinoResult cmd_prepare_winomt(const PrepareWinoOptions& o) {
  const auto entries = lexicon_entries(o.lexicon);
  std::map<std::string, BiasClass> classes;
  for (const auto& e : entries) {
    if (e.bias_class) classes[e.noun] = *e.bias_class;
  }
  const auto sentences = load_winomt(o.winomt, &classes);
  if (sentences.empty()) throw InputError(o.winomt.string() + ": no sentences");

  json lex;
  try {
    lex = json::parse(read_text_file(o.bias_lexicon));
  } catch (const json::exception& e) {
    throw InputError(o.bias_lexicon.string() + ": " + e.what());
  }
  if (!lex.contains("biases")) throw InputError(o.bias_lexicon.string() + ": missing 'biases'");
  const auto biases = lex["biases"].get<std::map<std::string, double>>();

  const auto split = split_winomt(sentences, o.seed);
  const auto targets = build_probe_targets(sentences, biases, o.include_swapped);

  DumpManifest m;
  for (const auto& s : sentences) {
    SentenceEntry e;
    e.id = s.id;
    e.text = s.text;
    e.noun = s.noun;
    e.variants = {"both_masked", "noun_revealed", "pronoun_revealed"};
    e.split = split.at(s.noun);
    m.sentences.push_back(std::move(e));
  }
  m.targets = targets;
  save_manifest(o.out, m);

  // Variant texts ride along for the extractor.
  json doc = json::parse(read_text_file(o.out));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto v = winomt_variants(sentences[i], o.mask_token, o.include_swapped);
    doc["sentences"][i]["variant_texts"] = {{"noun_revealed", v.noun_revealed},
                                            {"both_masked", v.both_masked},
                                            {"pronoun_revealed", v.pronoun_revealed}};
  }
  doc["mask_token"] = o.mask_token;
  write_text_file(o.out, doc.dump(1) + "\n");

  PrepareWinoResult r;
  r.sentences = sentences.size();
  for (const auto& [noun, sp] : split) ++r.nouns_per_split[sp];
  return r;
}

// train-probe ----------------------------------------------------------------

std::vector<LayerTrainSummary> cmd_train_probe(const TrainProbeOptions& o) {
  o.config.validate();
  if (o.jobs < 1) throw InputError("jobs must be at least 1");
  const Dump dump = read_dump(o.dump);
  const DumpManifest& m = dump.manifest;
  std::vector<int> layers = o.config.layers;
  if (layers.empty()) layers.assign(m.layers.begin(), m.layers.end());
  for (int l : layers) {
    if (l < 0 || std::find(m.layers.begin(), m.layers.end(), l) == m.layers.end()) {
      throw InputError("layer " + std::to_string(l) + " is not in the dump");
    }
  }
  for (const auto& s : m.sentences) {
    if (!s.split) throw InputError("sentence " + std::to_string(s.id) + " has no split in the manifest");
  }
  ensure_dir(o.out_dir);
  const json config_doc = json::parse(to_json(o.config));
  const std::string hash = config_hash(o.config);

  auto train_layer = [&](int layer) {
    const auto samples = assemble_probe_samples(dump.records, m.targets, static_cast<std::uint16_t>(layer));
    std::vector<ProbeSample> train, dev, test;
    for (const auto& s : samples) {
      switch (*m.find_sentence(s.sentence_id)->split) {
        case Split::Train: train.push_back(s); break;
        case Split::Dev: dev.push_back(s); break;
        case Split::Test: test.push_back(s); break;
      }
    }
    TrainConfig tc = o.config.train;
    tc.seed = o.config.seed + static_cast<std::uint64_t>(layer);
    TrainResult result = train_joint_probe(train, dev, tc);
    result.probe.layer = layer;

    LayerTrainSummary s;
    s.layer = layer;
    s.history = result.history;
    s.probe_hash = probe_fingerprint(result.probe);
    s.dev = {try_evaluate(result.probe, dev, Task::Bias), try_evaluate(result.probe, dev, Task::Gender)};
    s.test = {try_evaluate(result.probe, test, Task::Bias), try_evaluate(result.probe, test, Task::Gender)};
    s.probe_path = o.out_dir / ("probe_L" + std::to_string(layer) + ".gprb");
    s.report_path = o.out_dir / ("probe_L" + std::to_string(layer) + ".json");
    write_probe(s.probe_path, result.probe);

    const auto ov = filter_overlap(result.probe, o.config.epsilon);
    json report{{"layer", layer},
                {"dump", o.dump.string()},
                {"dump_crc32", m.crc32},
                {"config", config_doc},
                {"config_hash", hash},
                {"probe_file", s.probe_path.filename().string()},
                {"probe_hash", hex32(s.probe_hash)},
                {"samples", {{"train", train.size()}, {"dev", dev.size()}, {"test", test.size()}}},
                {"history", history_json(s.history)},
                {"evaluation",
                 {{"dev", {{"bias", evaluation_json(s.dev.bias)}, {"gender", evaluation_json(s.dev.gender)}}},
                  {"test", {{"bias", evaluation_json(s.test.bias)}, {"gender", evaluation_json(s.test.gender)}}}}},
                {"overlap",
                 {{"epsilon", o.config.epsilon},
                  {"bias_only", ov.bias_only},
                  {"gender_only", ov.gender_only},
                  {"shared", ov.shared}}}};
    write_text_file(s.report_path, report.dump(1) + "\n");
    return s;
  };

  std::vector<LayerTrainSummary> out;
  for (std::size_t start = 0; start < layers.size(); start += static_cast<std::size_t>(o.jobs)) {
    const auto stop = std::min(layers.size(), start + static_cast<std::size_t>(o.jobs));
    std::vector<std::future<LayerTrainSummary>> running;
    for (std::size_t i = start; i < stop; ++i) {
      running.push_back(std::async(o.jobs > 1 ? std::launch::async : std::launch::deferred,
                                   train_layer, layers[i]));
    }
    for (auto& f : running) out.push_back(f.get());
  }
  return out;
}

// build-filter ---------------------------------------------------------------

std::map<int, Path> find_probes(const Path& path) {
  std::vector<Path> files;
  if (std::filesystem::is_regular_file(path)) {
    files.push_back(path);
  } else if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".gprb") files.push_back(e.path());
    }
  } else {
    throw IoError("no probe file or directory at " + path.string());
  }
  std::map<int, Path> out;
  for (const auto& f : files) {
    const int layer = read_probe(f).layer;
    if (!out.emplace(layer, f).second) {
      throw InputError("two probes for layer " + std::to_string(layer) + " in " + path.string());
    }
  }
  if (out.empty()) throw InputError("no .gprb probes in " + path.string());
  return out;
}

std::vector<FilterSummary> cmd_build_filter(const BuildFilterOptions& o) {
  o.config.validate();
  const auto probes = find_probes(o.probes);
  std::vector<int> available;
  for (const auto& [layer, p] : probes) available.push_back(layer);
  const auto layers = top_layers(available, o.config.fl);
  ensure_dir(o.out_dir);

  std::vector<FilterSummary> out;
  for (int layer : layers) {
    const JointProbe probe = read_probe(probes.at(layer));
    AffineFilter f = build_filter(probe, {o.config.filter_kind, o.config.epsilon, layer});
    f.model_id = o.config.model_id;
    FilterSummary s;
    s.layer = layer;
    s.file = o.out_dir / ("filter_L" + std::to_string(layer) + ".gflt");
    s.kept = f.kept();
    s.removed = f.removed();
    s.overlap = filter_overlap(probe, o.config.epsilon);
    write_filter(s.file, f);
    out.push_back(std::move(s));
  }
  return out;
}

// overlap --------------------------------------------------------------------

std::map<int, DimensionOverlap> cmd_overlap(const OverlapOptions& o) {
  FilterSpec{FilterKind::BiasOnly, o.epsilon, -1}.validate();
  std::map<int, DimensionOverlap> out;
  for (const auto& [layer, path] : find_probes(o.probes)) {
    out[layer] = filter_overlap(read_probe(path), o.epsilon);
  }
  if (o.out_csv) {
    std::string csv = "layer,epsilon,bias_only,gender_only,shared\n";
    for (const auto& [layer, ov] : out) {
      csv += std::to_string(layer) + "," + format_number(o.epsilon) + "," +
             std::to_string(ov.bias_only) + "," + std::to_string(ov.gender_only) + "," +
             std::to_string(ov.shared) + "\n";
    }
    write_text_file(*o.out_csv, csv);
  }
  return out;
}

// report ---------------------------------------------------------------------

std::vector<TokenPrediction> read_accuracy_csv(const Path& path) {
  const CsvTable table = parse_csv(read_text_file(path));
  const auto find = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto gold = find("gold");
  const auto predicted = find("predicted");
  const auto gender = find("gender");
  if (!gold || !predicted) throw InputError(path.string() + ": needs gold and predicted columns");
  std::vector<TokenPrediction> out;
  for (const auto& row : table.rows) {
    TokenPrediction p{row[*gold], row[*predicted], std::nullopt};
    if (gender && !row[*gender].empty()) p.gender = row[*gender];
    out.push_back(std::move(p));
  }
  if (out.empty()) throw InputError(path.string() + ": no predictions");
  return out;
}

ReportResult cmd_report(const ReportOptions& o) {
  if (o.bias.empty() && o.accuracy.empty()) {
    throw InputError("report needs at least one bias or accuracy input");
  }
  const NounLexicon lexicon = to_lexicon(lexicon_entries(o.lexicon));
  ReportResult r;
  std::uint32_t crc = 0;
  for (const auto& [label, path] : o.bias) {
    crc = crc32(read_text_file(path), crc32(label, crc));
    r.bias_rows.emplace_back(label, aggregate_file(path, lexicon));
  }
  for (const auto& [label, path] : o.accuracy) {
    crc = crc32(read_text_file(path), crc32(label, crc));
    const auto preds = read_accuracy_csv(path);
    r.accuracy_rows.emplace_back(label, top1_accuracy(preds));
  }
  r.input_hash = hex32(crc);

  std::string md = "Inputs hash: " + r.input_hash + "\n\n";
  std::string csv = "table,setting,metric,value\n";
  if (!r.bias_rows.empty()) {
    md += "| Setting | MSE gendered | MSE gender-neutral | MEAN gender-neutral | VAR gender-neutral |\n"
          "|---|---|---|---|---|\n";
    for (const auto& [label, a] : r.bias_rows) {
      md += "| " + label + " | " + fixed(a.mse_g) + " | " + fixed(a.mse_gn) + " | " +
            fixed(a.mean_gn) + " | " + fixed(a.var_gn) + " |\n";
      const std::pair<const char*, double> metrics[] = {
          {"mse_g", a.mse_g}, {"mse_gn", a.mse_gn}, {"mean_gn", a.mean_gn}, {"var_gn", a.var_gn}};
      for (const auto& [name, v] : metrics) {
        csv += "rgp," + csv_escape(label) + "," + name + "," + format_number(v) + "\n";
      }
    }
    md += "\n";
  }
  if (!r.accuracy_rows.empty()) {
    std::set<std::string> genders;
    for (const auto& [label, a] : r.accuracy_rows) {
      for (const auto& [g, v] : a.per_gender) genders.insert(g);
    }
    md += "| Setting | Accuracy |";
    for (const auto& g : genders) md += " " + g + " |";
    md += "\n|---|---|";
    for (std::size_t i = 0; i < genders.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& [label, a] : r.accuracy_rows) {
      md += "| " + label + " | " + fixed(a.overall) + " |";
      csv += "accuracy," + csv_escape(label) + ",overall," + format_number(a.overall) + "\n";
      for (const auto& g : genders) {
        const auto it = a.per_gender.find(g);
        md += " " + (it == a.per_gender.end() ? std::string("-") : fixed(it->second)) + " |";
        if (it != a.per_gender.end()) {
          csv += "accuracy," + csv_escape(label) + "," + csv_escape(g) + "," +
                 format_number(it->second) + "\n";
        }
      }
      md += "\n";
    }
  }
  r.markdown = md;
  ensure_dir(o.out_dir);
  write_text_file(o.out_dir / "report.md", md);
  write_text_file(o.out_dir / "report.csv", csv);
  return r;
}

// epsilon-sweep --------------------------------------------------------------

std::vector<double> default_epsilon_grid() {
  std::vector<double> grid;
  for (int e = 2; e <= 16; e += 2) grid.push_back(std::pow(10.0, -e));
  return grid;
}

std::vector<SweepRow> cmd_epsilon_sweep(const SweepOptions& o) {
  if (o.epsilons.empty()) throw InputError("epsilon list is empty");
  const JointProbe probe = read_probe(o.probe);
  const auto d = static_cast<std::size_t>(probe.dim());

  std::vector<SweepRow> rows;
  for (double eps : o.epsilons) {
    SweepRow row;
    row.epsilon = eps;
    auto masked = [&](FilterKind kind) {
      const auto mask = filter_mask(probe, {kind, eps, probe.layer});
      return d - static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    };
    row.masked_bias_only = masked(FilterKind::BiasOnly);
    row.masked_bias_keep_gender = masked(FilterKind::BiasKeepGender);
    row.masked_gender_only = masked(FilterKind::GenderOnly);
    rows.push_back(row);
  }

  if (!o.bias.empty()) {
    const NounLexicon lexicon = to_lexicon(lexicon_entries(o.lexicon));
    for (const auto& [label, path] : o.bias) {
      double eps = 0.0;
      try {
        eps = std::stod(label);
      } catch (const std::exception&) {
        throw InputError("bias input label '" + label + "' is not an epsilon");
      }
      auto it = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
        return std::abs(r.epsilon - eps) <= 1e-9 * std::abs(eps);
      });
      if (it == rows.end()) throw InputError("epsilon " + label + " is not in the sweep");
      it->metrics = aggregate_file(path, lexicon);
    }
  }

  if (o.out_dir) {
    ensure_dir(*o.out_dir);
    std::string csv =
        "epsilon,masked_bias_only,masked_bias_keep_gender,masked_gender_only,mse_g,mse_gn,mean_gn,var_gn\n";
    for (auto& row : rows) {
      AffineFilter f = build_filter(probe, {o.kind, row.epsilon, probe.layer});
      f.model_id = o.model_id;
      row.filter_file = *o.out_dir / ("filter_eps" + sci(row.epsilon) + ".gflt");
      write_filter(*row.filter_file, f);
      csv += format_number(row.epsilon) + "," + std::to_string(row.masked_bias_only) + "," +
             std::to_string(row.masked_bias_keep_gender) + "," +
             std::to_string(row.masked_gender_only);
      if (row.metrics) {
        csv += "," + format_number(row.metrics->mse_g) + "," + format_number(row.metrics->mse_gn) +
               "," + format_number(row.metrics->mean_gn) + "," + format_number(row.metrics->var_gn);
      } else {
        csv += ",,,,";
      }
      csv += "\n";
    }
    write_text_file(*o.out_dir / "sweep.csv", csv);
  }
  return rows;
}

}  // namespace gprobe::cli

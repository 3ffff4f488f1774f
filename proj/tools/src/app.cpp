#include "gprobe/cli/app.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "CLI11.hpp"

#include "gprobe/cli/commands.hpp"
#include "gprobe/cli/config.hpp"
#include "gprobe/checksum.hpp"
#include "gprobe/edump_io.hpp"
#include "gprobe/errors.hpp"

namespace gprobe::cli {

namespace {

LabeledPath parse_labeled(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw InputError("expected LABEL=PATH, got '" + text + "'");
  }
  return {text.substr(0, eq), Path(text.substr(eq + 1))};
}

std::vector<LabeledPath> parse_labeled(const std::vector<std::string>& texts) {
  std::vector<LabeledPath> out;
  for (const auto& t : texts) out.push_back(parse_labeled(t));
  return out;
}

std::optional<Path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return Path(s);
}

// Pipeline settings: a JSON config file plus flag overrides.
struct ConfigFlags {
  std::string file;
  std::string model_id;
  std::vector<int> layers;
  int fl = 0;
  std::string filter;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  double lr = 0.0;
  double lambda_o = 0.0;
  double sv_l1 = 0.0;
  int max_epochs = 0;
  std::vector<CLI::Option*> options;

  void add(CLI::App& cmd) {
    cmd.add_option("--config", file, "pipeline config JSON")->check(CLI::ExistingFile);
    options = {
        cmd.add_option("--model-id", model_id, "model identifier recorded in outputs"),
        cmd.add_option("--layers", layers, "layers to process")->delimiter(','),
        cmd.add_option("--fl", fl, "number of top layers to filter"),
        cmd.add_option("--filter", filter, "bias_only, bias_keep_gender or gender_only"),
        cmd.add_option("--epsilon", epsilon, "scaling-vector threshold"),
        cmd.add_option("--seed", seed, "base seed"),
        cmd.add_option("--batch-size", batch_size, "training batch size"),
        cmd.add_option("--lr", lr, "initial learning rate"),
        cmd.add_option("--lambda-o", lambda_o, "orthogonality penalty weight"),
        cmd.add_option("--sv-l1", sv_l1, "scaling-vector soft threshold"),
        cmd.add_option("--max-epochs", max_epochs, "epoch limit"),
    };
  }

  bool given(std::size_t i) const { return options[i]->count() > 0; }

  PipelineConfig resolve() const {
    PipelineConfig c = file.empty() ? PipelineConfig{} : load_pipeline_config(file);
    if (given(0)) c.model_id = model_id;
    if (given(1)) c.layers = layers;
    if (given(2)) c.fl = fl;
    if (given(3)) c.filter_kind = filter_kind_from_string(filter);
    if (given(4)) c.epsilon = epsilon;
    if (given(5)) c.seed = seed;
    if (given(6)) c.train.batch_size = batch_size;
    if (given(7)) c.train.lr = lr;
    if (given(8)) c.train.lambda_o = lambda_o;
    if (given(9)) c.train.sv_l1 = sv_l1;
    if (given(10)) c.train.max_epochs = max_epochs;
    c.validate();
    return c;
  }
};

std::string eval_text(const std::optional<ProbeEvaluation>& e) {
  if (!e) return "n/a";
  return "pearson " + format_number(e->pearson) + " mae " + format_number(e->mae);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gender bias probing and filtering for masked language model embeddings", "gprobe"};
  app.require_subcommand(1);
  std::function<void()> action;

  // gen-synth
  GenSynthOptions gs;
  std::string gs_out;
  long long gs_d = gs.synth.d, gs_kb = gs.synth.k_bias, gs_kg = gs.synth.k_gender,
            gs_ks = gs.synth.k_shared;
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic dump with planted subspaces");
  gen->add_option("--out", gs_out, "output directory")->required();
  gen->add_option("--d", gs_d, "embedding dimension");
  gen->add_option("--k-bias", gs_kb, "bias support size");
  gen->add_option("--k-gender", gs_kg, "gender support size");
  gen->add_option("--k-shared", gs_ks, "shared support size");
  gen->add_option("--n", gs.synth.n_samples, "number of samples");
  gen->add_option("--noise", gs.synth.noise_sigma, "isotropic noise std-dev");
  gen->add_option("--nuisance", gs.synth.nuisance_sigma, "extra std-dev off both supports");
  gen->add_option("--seed", gs.synth.seed, "generator seed");
  gen->add_option("--layer", gs.layer, "layer index recorded in the dump");
  gen->add_option("--model-id", gs.model_id, "model id recorded in the dump");
  gen->add_option("--baseline-scale", gs.baseline_scale, "std-dev of baseline vectors");
  gen->callback([&] {
    action = [&] {
      gs.out_dir = gs_out;
      gs.synth.d = gs_d;
      gs.synth.k_bias = gs_kb;
      gs.synth.k_gender = gs_kg;
      gs.synth.k_shared = gs_ks;
      const auto r = cmd_gen_synth(gs);
      out << "wrote " << r.records << " records to " << r.dump.string() << " (crc32 " << hex32(r.crc)
          << ")\n";
    };
  });

  // make-prompts
  MakePromptsOptions mp;
  std::string mp_out, mp_lex, mp_lex_out;
  auto* prompts = app.add_subcommand("make-prompts", "write the prompt manifest for the adapter");
  prompts->add_option("--out", mp_out, "manifest path")->required();
  prompts->add_option("--lexicon", mp_lex, "lexicon JSON (default: built-in)");
  prompts->add_option("--lexicon-out", mp_lex_out, "also write the lexicon used");
  prompts->add_option("--mask-token", mp.mask_token, "mask token");
  prompts->callback([&] {
    action = [&] {
      mp.out = mp_out;
      mp.lexicon = optional_path(mp_lex);
      mp.lexicon_out = optional_path(mp_lex_out);
      out << "wrote " << cmd_make_prompts(mp) << " prompt instances to " << mp_out << "\n";
    };
  });

  // eval-bias
  EvalBiasOptions eb;
  std::string eb_probs, eb_out, eb_lex;
  auto* bias = app.add_subcommand("eval-bias", "per-noun RGP and bias lexicon from probabilities");
  bias->add_option("--probs", eb_probs, "probability CSV")->required();
  bias->add_option("--out", eb_out, "output directory")->required();
  bias->add_option("--lexicon", eb_lex, "lexicon JSON (default: built-in)");
  bias->add_option("--cap", eb.cap, "maximum nouns per biased class");
  bias->callback([&] {
    action = [&] {
      eb.probs = eb_probs;
      eb.out_dir = eb_out;
      eb.lexicon = optional_path(eb_lex);
      const auto r = cmd_eval_bias(eb);
      out << r.nouns.size() << " nouns, " << r.lexicon.female_biased.size() << " female-biased, "
          << r.lexicon.male_biased.size() << " male-biased\n";
    };
  });

  // prepare-winomt
  PrepareWinoOptions pw;
  std::string pw_in, pw_lex_bias, pw_out, pw_lex;
  bool pw_no_swap = false;
  auto* wino = app.add_subcommand("prepare-winomt", "split WinoMT and write the extraction manifest");
  wino->add_option("--winomt", pw_in, "WinoMT TSV")->required();
  wino->add_option("--bias-lexicon", pw_lex_bias, "bias_lexicon.json from eval-bias")->required();
  wino->add_option("--out", pw_out, "manifest path")->required();
  wino->add_option("--lexicon", pw_lex, "lexicon JSON with classes (default: built-in)");
  wino->add_option("--seed", pw.seed, "split seed");
  wino->add_option("--mask-token", pw.mask_token, "mask token");
  wino->add_flag("--no-swapped", pw_no_swap, "omit the opposite-pronoun variant");
  wino->callback([&] {
    action = [&] {
      pw.winomt = pw_in;
      pw.bias_lexicon = pw_lex_bias;
      pw.out = pw_out;
      pw.lexicon = optional_path(pw_lex);
      pw.include_swapped = !pw_no_swap;
      const auto r = cmd_prepare_winomt(pw);
      out << r.sentences << " sentences;";
      for (const auto& [split, n] : r.nouns_per_split) out << " " << to_string(split) << " " << n;
      out << " nouns\n";
    };
  });

  // train-probe
  TrainProbeOptions tp;
  ConfigFlags tp_cfg;
  std::string tp_dump, tp_out;
  auto* train = app.add_subcommand("train-probe", "train one joint probe per layer");
  train->add_option("--dump", tp_dump, "GEDT dump")->required();
  train->add_option("--out", tp_out, "output directory")->required();
  train->add_option("--jobs", tp.jobs, "layers trained concurrently")->check(CLI::PositiveNumber);
  tp_cfg.add(*train);
  train->callback([&] {
    action = [&] {
      tp.dump = tp_dump;
      tp.out_dir = tp_out;
      tp.config = tp_cfg.resolve();
      for (const auto& s : cmd_train_probe(tp)) {
        out << "layer " << s.layer << ": " << s.history.epochs.size() << " epochs, test bias "
            << eval_text(s.test.bias) << ", test gender " << eval_text(s.test.gender) << " -> "
            << s.probe_path.string() << "\n";
      }
    };
  });

  // build-filter
  BuildFilterOptions bf;
  ConfigFlags bf_cfg;
  std::string bf_probes, bf_out;
  auto* filter = app.add_subcommand("build-filter", "export affine filters for the top layers");
  filter->add_option("--probes", bf_probes, "probe file or directory")->required();
  filter->add_option("--out", bf_out, "output directory")->required();
  bf_cfg.add(*filter);
  filter->callback([&] {
    action = [&] {
      bf.probes = bf_probes;
      bf.out_dir = bf_out;
      bf.config = bf_cfg.resolve();
      for (const auto& s : cmd_build_filter(bf)) {
        out << "layer " << s.layer << ": kept " << s.kept << ", removed " << s.removed << " -> "
            << s.file.string() << "\n";
      }
    };
  });

  // overlap
  OverlapOptions ov;
  std::string ov_probes, ov_csv;
  auto* overlap = app.add_subcommand("overlap", "count bias-only, gender-only and shared dimensions");
  overlap->add_option("--probes", ov_probes, "probe file or directory")->required();
  overlap->add_option("--epsilon", ov.epsilon, "scaling-vector threshold");
  overlap->add_option("--csv", ov_csv, "write the counts as CSV");
  overlap->callback([&] {
    action = [&] {
      ov.probes = ov_probes;
      ov.out_csv = optional_path(ov_csv);
      out << "layer bias_only gender_only shared\n";
      for (const auto& [layer, o] : cmd_overlap(ov)) {
        out << layer << " " << o.bias_only << " " << o.gender_only << " " << o.shared << "\n";
      }
    };
  });

  // report
  ReportOptions rp;
  std::vector<std::string> rp_bias, rp_acc;
  std::string rp_lex, rp_out;
  auto* report = app.add_subcommand("report", "aggregate bias and accuracy tables");
  report->add_option("--bias", rp_bias, "LABEL=noun_bias.csv");
  report->add_option("--accuracy", rp_acc, "LABEL=predictions.csv");
  report->add_option("--lexicon", rp_lex, "lexicon JSON (default: built-in)");
  report->add_option("--out", rp_out, "output directory")->required();
  report->callback([&] {
    action = [&] {
      rp.bias = parse_labeled(rp_bias);
      rp.accuracy = parse_labeled(rp_acc);
      rp.lexicon = optional_path(rp_lex);
      rp.out_dir = rp_out;
      out << cmd_report(rp).markdown;
    };
  });

  // epsilon-sweep
  SweepOptions sw;
  std::string sw_probe, sw_out, sw_kind, sw_lex;
  std::vector<std::string> sw_bias;
  auto* sweep = app.add_subcommand("epsilon-sweep", "masked dimensions and filters across epsilon");
  sweep->add_option("--probe", sw_probe, "probe file")->required();
  sweep->add_option("--epsilons", sw.epsilons, "epsilon grid")->delimiter(',');
  sweep->add_option("--out", sw_out, "write one filter per epsilon and sweep.csv here");
  sweep->add_option("--filter", sw_kind, "filter kind of the written filters");
  sweep->add_option("--bias", sw_bias, "EPSILON=noun_bias.csv");
  sweep->add_option("--lexicon", sw_lex, "lexicon JSON (default: built-in)");
  sweep->add_option("--model-id", sw.model_id, "model id recorded in filters");
  sweep->callback([&] {
    action = [&] {
      sw.probe = sw_probe;
      sw.out_dir = optional_path(sw_out);
      if (!sw_kind.empty()) sw.kind = filter_kind_from_string(sw_kind);
      sw.bias = parse_labeled(sw_bias);
      sw.lexicon = optional_path(sw_lex);
      out << "epsilon bias_only bias_keep_gender gender_only mse_gn\n";
      for (const auto& r : cmd_epsilon_sweep(sw)) {
        out << format_number(r.epsilon) << " " << r.masked_bias_only << " "
            << r.masked_bias_keep_gender << " " << r.masked_gender_only << " "
            << (r.metrics ? format_number(r.metrics->mse_gn) : "-") << "\n";
      }
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    action();
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace gprobe::cli

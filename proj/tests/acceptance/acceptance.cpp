// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "golden.hpp"
#include "support.hpp"

#include "gprobe/checksum.hpp"
#include "gprobe/cli/commands.hpp"
#include "gprobe/edump_io.hpp"
#include "gprobe/errors.hpp"
#include "gprobe/filter.hpp"
#include "gprobe/lexicon.hpp"
#include "gprobe/metrics.hpp"
#include "gprobe/synth.hpp"
#include "gprobe/trainer.hpp"

using namespace gprobe;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<ProbeSample> slice(const std::vector<ProbeSample>& v, std::size_t b, std::size_t e) {
  return {v.begin() + static_cast<std::ptrdiff_t>(b), v.begin() + static_cast<std::ptrdiff_t>(e)};
}

std::vector<ProbeSample> filtered(const AffineFilter& f, std::vector<ProbeSample> v) {
  for (auto& s : v) s.delta = apply_filter_to_difference(f, s.delta);
  return v;
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void signed_norm_gradient() {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Vector v = test::random_vector(32, rng);
    for (Index i = 0; i < 32; ++i) {
      if (std::abs(v[i]) < 1e-3) v[i] = 0.5;
    }
    const Vector numeric = test::numeric_gradient([](const Vector& x) { return signed_norm(x); }, v);
    worst = std::max(worst, test::relative_error(signed_norm_grad(v), numeric));
  }
  report(worst <= 1e-4, "signed-norm gradient", fmt("max relative error %.2e over 1000 vectors, d = 32", worst));
}

void probe_gradient() {
  Rng rng(102);
  const Index d = 16;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    JointProbe p = init_probe(d, rng, 1.0);
    p.rotation += 0.05 * gaussian_matrix(d, d, rng);
    p.icpt_bias = test::random_vector(d, rng, 0.3);
    p.icpt_gender = test::random_vector(d, rng, 0.3);
    const auto batch = test::random_samples(d, 8, rng);
    const Vector analytic = pack_gradient(probe_grad(p, batch, 0.1));
    const Vector numeric = test::numeric_gradient(
        [&](const Vector& x) {
          JointProbe q = p;
          unpack_parameters(x, q);
          return probe_loss(q, batch, 0.1);
        },
        pack_parameters(p));
    worst = std::max(worst, test::relative_error(analytic, numeric));
  }
  report(worst <= 1e-4, "probe gradient", fmt("max relative error %.2e over 20 probes, d = 16, batch 8", worst));
}

// Trains on the planted data set and runs the recovery, orthogonality and
// refit checks. Returns the trained probe for the later criteria.
JointProbe synthetic_recovery() {
  const auto start = std::chrono::steady_clock::now();
  SynthConfig sc;  // d 64, k 8/8/4, noise 0.01, n 2000
  const auto data = generate_synthetic(sc);
  const auto train = slice(data.samples, 0, 1200);
  const auto dev = slice(data.samples, 1200, 1600);
  const auto test_set = slice(data.samples, 1600, 2000);

  TrainConfig tc;  // lambda_O = 0.1
  const auto result = train_joint_probe(train, dev, tc);
  const auto& h = result.history;
  report(h.pre_projection_defect <= 1e-3 && h.post_projection_defect <= 1e-10, "orthogonality",
         fmt("pre-projection defect %.2e", h.pre_projection_defect) +
             fmt(", post-projection defect %.2e", h.post_projection_defect));

  const double pb = evaluate_probe(result.probe, test_set, Task::Bias).pearson;
  const double pg = evaluate_probe(result.probe, test_set, Task::Gender).pearson;

  auto refit = [&](FilterKind kind, Task task) {
    const AffineFilter f = build_filter(result.probe, {kind, 1e-12, 0});
    TrainConfig rc = tc;
    rc.seed = tc.seed + 1;
    const auto re = train_joint_probe(filtered(f, train), filtered(f, dev), rc);
    const auto te = filtered(f, test_set);
    try {
      return std::pair{evaluate_probe(re.probe, te, task).pearson, f.kept()};
    } catch (const NumericalError&) {
      return std::pair{0.0, f.kept()};  // constant predictions carry no correlation
    }
  };
  const auto [bias_refit, bias_kept] = refit(FilterKind::BiasOnly, Task::Bias);
  const auto [gender_refit, gender_kept] = refit(FilterKind::BiasKeepGender, Task::Gender);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool held_out = pb >= 0.95 && pg >= 0.95;
  const bool ok = held_out && bias_refit <= 0.2 && gender_refit >= 0.8 && seconds < 300.0;
  report(ok, "synthetic recovery",
         fmt("held-out Pearson bias %.4f", pb) + fmt(" gender %.4f", pg) +
             fmt("; bias_only refit bias Pearson %.3f", bias_refit) +
             fmt(" (%.0f dims kept, limit 0.2)", static_cast<double>(bias_kept)) +
             fmt("; bias_keep_gender refit gender Pearson %.3f", gender_refit) +
             fmt(" (%.0f dims kept, floor 0.8)", static_cast<double>(gender_kept)) +
             fmt("; %.1f s", seconds));
  return result.probe;
}

// Probe with sparse scaling vectors, some entries just under epsilon.
JointProbe sparse_probe(Index d, Rng& rng, double eps) {
  JointProbe p = init_probe(d, rng, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  for (Index j = 0; j < d; ++j) {
    const int b = pick(rng);
    if (b == 0) p.sv_bias[j] = 0.0;
    if (b == 1) p.sv_bias[j] = 0.5 * eps;
    if (pick(rng) == 0) p.sv_gender[j] = 0.0;
  }
  p.icpt_bias = test::random_vector(d, rng);
  p.icpt_gender = test::random_vector(d, rng);
  return p;
}

void filter_algebra(const JointProbe& trained) {
  Rng rng(103);
  double proj = 0.0, sym = 0.0, idem_excess = 0.0;
  bool monotone = true;
  std::vector<JointProbe> probes{trained};
  for (int t = 0; t < 50; ++t) probes.push_back(sparse_probe(24, rng, 1e-4));
  for (const auto& p : probes) {
    for (double eps : {1e-2, 1e-4, 1e-12}) {
      for (FilterKind kind : {FilterKind::BiasOnly, FilterKind::BiasKeepGender, FilterKind::GenderOnly}) {
        const AffineFilter f = build_filter(p, {kind, eps, 0});
        const Matrix& m = f.projection;
        proj = std::max(proj, (m * m - m).cwiseAbs().maxCoeff());
        sym = std::max(sym, (m - m.transpose()).cwiseAbs().maxCoeff());
        if (kind == FilterKind::BiasKeepGender) continue;
        const Vector& icpt = kind == FilterKind::BiasOnly ? p.icpt_bias : p.icpt_gender;
        const double bound = eps * icpt.cwiseAbs().maxCoeff() + 1e-10;
        for (int k = 0; k < 5; ++k) {
          const Vector once = apply_filter(f, test::random_vector(p.dim(), rng, 3.0));
          const double err = (apply_filter(f, once) - once).cwiseAbs().maxCoeff();
          idem_excess = std::max(idem_excess, err - bound);
        }
      }
      const auto b = filter_mask(p, {FilterKind::BiasOnly, eps, 0});
      const auto bg = filter_mask(p, {FilterKind::BiasKeepGender, eps, 0});
      for (std::size_t j = 0; j < b.size(); ++j) monotone = monotone && bg[j] >= b[j];
    }
  }
  const bool ok = proj <= 1e-10 && sym <= 1e-10 && idem_excess <= 0.0 && monotone;
  report(ok, "filter algebra",
         fmt("max |M^2 - M| %.2e", proj) + fmt(", max |M - M^T| %.2e", sym) +
             fmt(", affine idempotence margin %.2e", -idem_excess) +
             (monotone ? ", masks monotone" : ", masks NOT monotone") + " (51 probes x 3 eps)");
}

void metric_identities() {
  Rng rng(104);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::map<std::string, double> b;
    NounLexicon lex;
    const int n = 2 + t % 150;
    const Vector v = test::random_vector(n, rng, 0.2 + 0.01 * (t % 300));
    for (int k = 0; k < n; ++k) {
      const auto noun = "n" + std::to_string(k);
      b[noun] = v[k];
      lex.gender_neutral.insert(noun);
    }
    const auto agg = aggregate(b, lex);
    worst = std::max(worst, std::abs(agg.var_gn - (agg.mse_gn - agg.mean_gn * agg.mean_gn)));
  }
  // The published BERT-large row, and the same row recomputed from per-noun values.
  const double printed = std::abs(0.099 - 0.235 * 0.235 - 0.044);
  const auto large = aggregate(reference_biases(ReferenceModel::BertLarge), reference_lexicon());
  const double recomputed = std::max({std::abs(large.mse_gn - 0.099), std::abs(large.mean_gn - 0.235),
                                      std::abs(large.var_gn - 0.044)});
  const bool ok = worst <= 1e-10 && printed <= 5e-4 && recomputed <= 2e-3;
  report(ok, "metric identities",
         fmt("max |VAR - (MSE - MEAN^2)| %.2e on 1000 inputs", worst) +
             fmt("; BERT-L 0.099 - 0.235^2 = %.6f vs printed 0.044", 0.099 - 0.235 * 0.235) +
             fmt("; recomputed row max deviation %.4f", recomputed));
}

void binary_formats() {
  test::TempDir dir("acceptance_io");
  bool ok = true;
  std::string detail;

  auto manifest = golden::dump_manifest();
  const auto records = golden::dump_records();
  const auto crc = write_dump(dir / "g.gedt", records, manifest);
  const Dump back = read_dump(dir / "g.gedt");
  bool same = back.records.size() == records.size();
  for (std::size_t i = 0; same && i < records.size(); ++i) {
    same = back.records[i].sentence_id == records[i].sentence_id &&
           back.records[i].variant == records[i].variant && back.records[i].role == records[i].role &&
           back.records[i].layer == records[i].layer &&
           std::memcmp(back.records[i].vector.data(), records[i].vector.data(),
                       records[i].vector.size() * sizeof(float)) == 0;
  }
  auto m2 = back.manifest;
  write_dump(dir / "h.gedt", back.records, m2);
  same = same && file_bytes(dir / "g.gedt") == file_bytes(dir / "h.gedt");
  ok = ok && same && crc == golden::kDumpCrc;
  detail += "GEDT " + std::string(same ? "bitwise" : "MISMATCH") + ", crc " + hex32(crc) + " (golden " +
            hex32(golden::kDumpCrc) + ")";

  const auto fbytes = encode_filter(golden::filter());
  const auto fcrc = crc32(fbytes);
  const bool fsame = encode_filter(decode_filter(fbytes)) == fbytes;
  Rng rng(105);
  JointProbe p = sparse_probe(20, rng, 1e-6);
  const AffineFilter built = build_filter(p, {FilterKind::BiasOnly, 1e-6, 5});
  write_filter(dir / "a.gflt", built);
  write_filter(dir / "b.gflt", read_filter(dir / "a.gflt"));
  const bool file_same = file_bytes(dir / "a.gflt") == file_bytes(dir / "b.gflt");
  ok = ok && fsame && file_same && fcrc == golden::kFilterCrc;
  detail += "; GFLT " + std::string(fsame && file_same ? "bitwise" : "MISMATCH") + ", crc " + hex32(fcrc) +
            " (golden " + hex32(golden::kFilterCrc) + ")";
  report(ok, "GEDT/GFLT round trips", detail);
}

// The filter vector F marks the kept coordinates (F = 1 where eps > |SV|), so
// its support must not shrink as eps grows; the removed count is its
// complement and must not grow.
void epsilon_sweep(const JointProbe& trained) {
  test::TempDir dir("acceptance_sweep");
  write_probe(dir / "probe.gprb", trained);
  cli::SweepOptions o;
  o.probe = dir / "probe.gprb";
  auto grid = cli::default_epsilon_grid();
  std::sort(grid.begin(), grid.end());
  o.epsilons = grid;
  const auto rows = cli::cmd_epsilon_sweep(o);
  const auto d = static_cast<std::size_t>(trained.dim());

  bool monotone = rows.size() == 8;
  auto non_decreasing = [&](const std::vector<std::size_t>& counts) {
    for (std::size_t k = 1; k < counts.size(); ++k) monotone = monotone && counts[k - 1] <= counts[k];
  };
  std::vector<std::size_t> bo, bkg, go;
  std::string ones, removed;
  for (const auto& r : rows) {
    bo.push_back(d - r.masked_bias_only);
    bkg.push_back(d - r.masked_bias_keep_gender);
    go.push_back(d - r.masked_gender_only);
    ones += (ones.empty() ? "" : " ") + std::to_string(d - r.masked_bias_only);
    removed += (removed.empty() ? "" : " ") + std::to_string(r.masked_bias_only);
  }
  non_decreasing(bo);
  non_decreasing(bkg);
  non_decreasing(go);

  // Probes with scaling entries spread log-uniformly across the grid.
  Rng rng(106);
  std::uniform_real_distribution<double> exponent(-18.0, 0.0);
  std::size_t changes = 0;
  for (int t = 0; t < 50; ++t) {
    JointProbe p = init_probe(32, rng, 1.0);
    for (Index j = 0; j < 32; ++j) {
      p.sv_bias[j] = std::pow(10.0, exponent(rng));
      p.sv_gender[j] = std::pow(10.0, exponent(rng));
    }
    for (FilterKind kind : {FilterKind::BiasOnly, FilterKind::BiasKeepGender, FilterKind::GenderOnly}) {
      std::vector<std::size_t> c;
      for (double eps : grid) {
        const auto mask = filter_mask(p, {kind, eps, 0});
        c.push_back(static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)));
      }
      changes += c.back() - c.front();
      non_decreasing(c);
    }
  }
  report(monotone, "epsilon sweep monotonicity",
         "trained probe, eps 1e-16..1e-2 ascending: F = 1 counts " + ones + ", removed " + removed +
             "; 50 log-uniform probes x 3 kinds non-decreasing: " + (monotone ? "yes" : "no") +
             " (" + std::to_string(changes) + " total count increases)");
}

}  // namespace

int main() {
  try {
    signed_norm_gradient();
    probe_gradient();
    const JointProbe trained = synthetic_recovery();
    filter_algebra(trained);
    metric_identities();
    binary_formats();
    epsilon_sweep(trained);
  } catch (const std::exception& e) {
    std::printf("FAIL  aborted: %s\n", e.what());
    return 100;
  }
  std::printf("%d criteria failed\n", failures);
  return failures;
}

#include "gprobe/synth.hpp"

#include <cmath>
#include <string>

#include "gprobe/errors.hpp"

namespace gprobe {

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("invalid synthetic config: " + what);
  };
  require(d > 0, "d must be positive");
  require(k_bias >= 1 && k_gender >= 1, "each support needs at least one coordinate");
  require(k_shared >= 0 && k_shared <= std::min(k_bias, k_gender),
          "k_shared must lie in [0, min(k_bias, k_gender)]");
  require(k_bias + k_gender - k_shared <= d, "k_bias + k_gender - k_shared must not exceed d");
  require(n_samples >= 2, "n_samples must be at least 2");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be >= 0");
  require(nuisance_sigma >= 0.0 && std::isfinite(nuisance_sigma),
          "nuisance_sigma must be >= 0");
  require(bias_min < bias_max, "bias range is empty");
}

namespace {

Vector support_weights(Index d, const std::vector<Index>& support, Rng& rng) {
  std::uniform_real_distribution<double> frac(0.25, 1.0);
  Vector w = Vector::Zero(d);
  w[support.front()] = 1.0;
  for (std::size_t k = 1; k < support.size(); ++k) w[support[k]] = frac(rng);
  return w / w.norm();
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SynthData data;
  SynthTruth& t = data.truth;
  t.rotation = random_orthogonal(config.d, rng);
  for (Index j = 0; j < config.k_bias; ++j) t.bias_support.push_back(j);
  const Index g0 = config.k_bias - config.k_shared;
  for (Index j = 0; j < config.k_gender; ++j) t.gender_support.push_back(g0 + j);
  t.bias_weights = support_weights(config.d, t.bias_support, rng);
  t.gender_weights = support_weights(config.d, t.gender_support, rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> bias_target(config.bias_min, config.bias_max);
  std::uniform_int_distribution<int> gender_target(-1, 1);

  const Index off_support = config.k_bias + config.k_gender - config.k_shared;
  data.samples.reserve(config.n_samples);
  Vector z(config.d);
  for (std::size_t k = 0; k < config.n_samples; ++k) {
    ProbeSample s;
    s.sentence_id = static_cast<std::uint32_t>(k);
    s.task = (k % 2 == 0) ? Task::Bias : Task::Gender;
    s.target = s.task == Task::Bias ? bias_target(rng) : static_cast<double>(gender_target(rng));
    for (Index j = 0; j < config.d; ++j) z[j] = config.noise_sigma * noise(rng);
    if (config.nuisance_sigma > 0.0) {
      for (Index j = off_support; j < config.d; ++j) z[j] += config.nuisance_sigma * noise(rng);
    }
    z += s.target * (s.task == Task::Bias ? t.bias_weights : t.gender_weights);
    s.delta = t.rotation.transpose() * z;
    data.samples.push_back(std::move(s));
  }
  return data;
}

JointProbe ground_truth_probe(const SynthTruth& truth) {
  const Index d = truth.rotation.rows();
  JointProbe p;
  p.rotation = truth.rotation;
  p.sv_bias = Vector::Zero(d);
  p.sv_gender = Vector::Zero(d);
  for (Index j : truth.bias_support) p.sv_bias[j] = 1.0;
  for (Index j : truth.gender_support) p.sv_gender[j] = 1.0;
  p.icpt_bias = Vector::Zero(d);
  p.icpt_gender = Vector::Zero(d);
  return p;
}

double recovered_energy(const JointProbe& probe, Task task, const Vector& direction,
                        double epsilon) {
  if (direction.size() != probe.dim()) {
    throw DimensionError("recovered_energy: direction dimension does not match probe");
  }
  const double total = direction.squaredNorm();
  if (total == 0.0) throw NumericalError("recovered_energy: zero direction");
  const Vector rotated = probe.rotation * direction;
  const Vector& sv = probe.scaling(task);
  double kept = 0.0;
  for (Index j = 0; j < rotated.size(); ++j) {
    if (std::abs(sv[j]) >= epsilon) kept += rotated[j] * rotated[j];
  }
  return kept / total;
}

}  // namespace gprobe

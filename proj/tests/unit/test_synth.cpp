#include <cmath>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "gprobe/errors.hpp"
#include "gprobe/synth.hpp"

using namespace gprobe;

TEST_CASE("synthetic config validation") {
  SynthConfig c;
  CHECK_NOTHROW(c.validate());
  c.k_shared = 9;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.d = 10;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.noise_sigma = -1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("planted structure") {
  SynthConfig c;
  const auto data = generate_synthetic(c);
  const auto& t = data.truth;
  CHECK(data.samples.size() == 2000);
  CHECK(orthogonality_defect(t.rotation) <= 1e-12);
  CHECK(t.bias_support == std::vector<Index>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(t.gender_support == std::vector<Index>{4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(t.bias_weights.norm() == doctest::Approx(1.0));
  CHECK(t.gender_weights.norm() == doctest::Approx(1.0));
  CHECK(t.bias_weights.minCoeff() >= 0.0);
  CHECK(t.bias_weights.tail(56).isZero(0.0));
  CHECK(t.gender_weights.head(4).isZero(0.0));
  for (std::size_t k = 0; k < data.samples.size(); ++k) {
    CHECK(data.samples[k].task == (k % 2 == 0 ? Task::Bias : Task::Gender));
  }
  std::set<double> genders;
  for (const auto& s : data.samples) {
    if (s.task == Task::Gender) genders.insert(s.target);
    else CHECK(std::abs(s.target) <= 2.0);
  }
  CHECK(genders.size() >= 2);
}

TEST_CASE("ground truth probe is exact without noise") {
  SynthConfig c;
  c.noise_sigma = 0.0;
  c.seed = 5;
  const auto data = generate_synthetic(c);
  const JointProbe truth = ground_truth_probe(data.truth);
  CHECK(probe_loss(truth, data.samples, 0.0) <= 1e-10);

  // Bias samples lie on the planted bias direction.
  const Vector dir = data.truth.bias_direction();
  for (std::size_t k = 0; k < 20; k += 2) {
    const auto& s = data.samples[k];
    CHECK((s.delta - s.target * dir).norm() <= 1e-10);
  }
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig c;
  c.n_samples = 50;
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  for (std::size_t k = 0; k < 50; ++k) {
    CHECK(a.samples[k].delta == b.samples[k].delta);
    CHECK(a.samples[k].target == b.samples[k].target);
  }
  c.seed = 1;
  CHECK(generate_synthetic(c).samples[0].delta != a.samples[0].delta);
}

TEST_CASE("noise level") {
  SynthConfig c;
  c.noise_sigma = 0.5;
  c.n_samples = 4000;
  const auto data = generate_synthetic(c);
  const JointProbe truth = ground_truth_probe(data.truth);
  // Off-support coordinates in the planted basis carry only the noise.
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& s : data.samples) {
    const Vector z = truth.rotation * s.delta;
    for (Index j = 12; j < 64; ++j) sq += z[j] * z[j];
    count += 52;
  }
  CHECK(std::sqrt(sq / static_cast<double>(count)) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("recovered_energy") {
  SynthConfig c;
  const auto data = generate_synthetic(c);
  const JointProbe truth = ground_truth_probe(data.truth);
  CHECK(recovered_energy(truth, Task::Bias, data.truth.bias_direction(), 1e-12) == doctest::Approx(1.0));
  CHECK(recovered_energy(truth, Task::Gender, data.truth.gender_direction(), 1e-12) ==
        doctest::Approx(1.0));
  const double cross = recovered_energy(truth, Task::Gender, data.truth.bias_direction(), 1e-12);
  CHECK(cross > 0.0);
  CHECK(cross < 1.0);

  JointProbe empty = truth;
  empty.sv_bias.setZero();
  CHECK(recovered_energy(empty, Task::Bias, data.truth.bias_direction(), 1e-12) == 0.0);
  CHECK_THROWS_AS(recovered_energy(truth, Task::Bias, Vector::Zero(64), 1e-12), NumericalError);
  CHECK_THROWS_AS(recovered_energy(truth, Task::Bias, Vector::Ones(3), 1e-12), DimensionError);
}

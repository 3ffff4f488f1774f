#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "gprobe/errors.hpp"
#include "gprobe/probe.hpp"

using namespace gprobe;

namespace {

// Step-by-step forward with explicit loops.
double forward_oracle(const JointProbe& p, const Vector& delta, Task task) {
  const Index d = p.dim();
  const Vector& sv = task == Task::Bias ? p.sv_bias : p.sv_gender;
  const Vector& ic = task == Task::Bias ? p.icpt_bias : p.icpt_gender;
  double pos = 0.0, neg = 0.0;
  for (Index i = 0; i < d; ++i) {
    double z = 0.0;
    for (Index j = 0; j < d; ++j) z += p.rotation(i, j) * delta[j];
    const double u = sv[i] * z - ic[i];
    (u > 0 ? pos : neg) += u * u;
  }
  return std::sqrt(pos) - std::sqrt(neg);
}

double loss_oracle(const JointProbe& p, const std::vector<ProbeSample>& batch, double lambda_o) {
  double sum = 0.0;
  for (const auto& s : batch) sum += std::abs(forward_oracle(p, s.delta, s.task) - s.target);
  const Matrix g = p.rotation.transpose() * p.rotation - Matrix::Identity(p.dim(), p.dim());
  double f = 0.0;
  for (Index i = 0; i < g.size(); ++i) f += g.data()[i] * g.data()[i];
  return sum / static_cast<double>(batch.size()) + lambda_o * std::sqrt(f);
}

JointProbe perturbed_probe(Index d, Rng& rng) {
  JointProbe p = init_probe(d, rng, 1.0);
  p.rotation += 0.05 * gaussian_matrix(d, d, rng);
  p.icpt_bias = test::random_vector(d, rng, 0.3);
  p.icpt_gender = test::random_vector(d, rng, 0.3);
  return p;
}

}  // namespace

TEST_CASE("probe_forward examples") {
  Rng rng(1);
  JointProbe p = init_probe(4, rng);
  CHECK(probe_forward(p, Vector::Zero(4), Task::Bias) == 0.0);

  JointProbe q;
  q.rotation = Matrix::Identity(2, 2);
  q.sv_bias = Vector{{1.0, 0.0}};
  q.sv_gender = Vector::Zero(2);
  q.icpt_bias = Vector::Zero(2);
  q.icpt_gender = Vector::Zero(2);
  CHECK(probe_forward(q, Vector{{2.0, -7.0}}, Task::Bias) == doctest::Approx(2.0));
  CHECK_THROWS_AS(probe_forward(q, Vector::Zero(3), Task::Bias), DimensionError);
}

TEST_CASE("probe_forward matches an explicit-loop oracle") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const JointProbe p = perturbed_probe(9, rng);
    const Vector delta = test::random_vector(9, rng);
    for (Task task : {Task::Bias, Task::Gender}) {
      CHECK(probe_forward(p, delta, task) ==
            doctest::Approx(forward_oracle(p, delta, task)).epsilon(1e-12));
    }
  }
}

TEST_CASE("probe_forward is invariant under a consistent permutation") {
  Rng rng(3);
  const JointProbe p = perturbed_probe(7, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 7, rng);
  JointProbe q = p;
  q.rotation = perm * p.rotation;
  q.sv_bias = perm * p.sv_bias;
  q.sv_gender = perm * p.sv_gender;
  q.icpt_bias = perm * p.icpt_bias;
  q.icpt_gender = perm * p.icpt_gender;
  for (int t = 0; t < 20; ++t) {
    const Vector delta = test::random_vector(7, rng);
    CHECK(probe_forward(q, delta, Task::Bias) ==
          doctest::Approx(probe_forward(p, delta, Task::Bias)).epsilon(1e-12));
    CHECK(probe_forward(q, delta, Task::Gender) ==
          doctest::Approx(probe_forward(p, delta, Task::Gender)).epsilon(1e-12));
  }
}

TEST_CASE("probe_loss examples") {
  JointProbe q;
  q.rotation = Matrix::Identity(2, 2);
  q.sv_bias = Vector{{1.0, 0.0}};
  q.sv_gender = Vector{{0.0, 1.0}};
  q.icpt_bias = Vector::Zero(2);
  q.icpt_gender = Vector::Zero(2);

  const std::vector<ProbeSample> exact{{Vector{{1.5, 3.0}}, 1.5, Task::Bias, 0},
                                       {Vector{{4.0, -1.0}}, -1.0, Task::Gender, 1}};
  CHECK(probe_loss(q, exact, 0.1) == 0.0);

  const std::vector<ProbeSample> one{{Vector{{2.0, 0.0}}, 0.5, Task::Bias, 0}};
  CHECK(probe_loss(q, one, 0.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(probe_loss(q, {}, 0.1), InputError);

  JointProbe scaled = q;
  scaled.rotation *= 2.0;
  scaled.sv_bias /= 2.0;
  scaled.sv_gender /= 2.0;
  // predictions unchanged, only the penalty remains
  CHECK(probe_loss(scaled, exact, 0.1) == doctest::Approx(0.1 * 3.0 * std::sqrt(2.0)));
}

TEST_CASE("probe_loss matches a summation oracle") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const JointProbe p = perturbed_probe(6, rng);
    const auto batch = test::random_samples(6, 12, rng);
    const double loss = probe_loss(p, batch, 0.1);
    CHECK(loss >= 0.0);
    CHECK(std::abs(loss - loss_oracle(p, batch, 0.1)) <= 1e-10);
  }
}

TEST_CASE("probe_grad matches central differences") {
  Rng rng(5);
  const Index d = 16;
  for (int t = 0; t < 10; ++t) {
    const JointProbe p = perturbed_probe(d, rng);
    const auto batch = test::random_samples(d, 8, rng);
    const ProbeGrad g = probe_grad(p, batch, 0.1);

    auto check_block = [&](auto accessor, const Vector& analytic) {
      JointProbe work = p;
      Vector& target = accessor(work);
      const Vector x0 = target;
      const Vector numeric = test::numeric_gradient(
          [&](const Vector& x) {
            target = x;
            return probe_loss(work, batch, 0.1);
          },
          x0);
      target = x0;
      CHECK(test::relative_error(analytic, numeric) <= 1e-4);
    };
    check_block([](JointProbe& q) -> Vector& { return q.sv_bias; }, g.sv_bias);
    check_block([](JointProbe& q) -> Vector& { return q.sv_gender; }, g.sv_gender);
    check_block([](JointProbe& q) -> Vector& { return q.icpt_bias; }, g.icpt_bias);
    check_block([](JointProbe& q) -> Vector& { return q.icpt_gender; }, g.icpt_gender);

    JointProbe work = p;
    const Vector r0 = Eigen::Map<const Vector>(p.rotation.data(), p.rotation.size());
    const Vector numeric = test::numeric_gradient(
        [&](const Vector& x) {
          work.rotation = Eigen::Map<const Matrix>(x.data(), d, d);
          return probe_loss(work, batch, 0.1);
        },
        r0);
    CHECK(test::relative_error(Eigen::Map<const Vector>(g.rotation.data(), g.rotation.size()),
                               numeric) <= 1e-4);
  }
}

TEST_CASE("probe_grad task separation and zero-loss batch") {
  Rng rng(6);
  const JointProbe p = perturbed_probe(5, rng);
  auto batch = test::random_samples(5, 10, rng);
  std::erase_if(batch, [](const ProbeSample& s) { return s.task != Task::Bias; });
  const ProbeGrad g = probe_grad(p, batch, 0.1);
  CHECK(g.sv_gender.isZero(0.0));
  CHECK(g.icpt_gender.isZero(0.0));
  CHECK_FALSE(g.sv_bias.isZero(0.0));

  JointProbe q = init_probe(3, rng);
  std::vector<ProbeSample> exact;
  for (int k = 0; k < 4; ++k) {
    ProbeSample s{test::random_vector(3, rng), 0.0, k % 2 ? Task::Gender : Task::Bias, 0};
    s.target = probe_forward(q, s.delta, s.task);
    exact.push_back(s);
  }
  q.rotation *= 1.1;  // penalty active, predictions refit below
  for (auto& s : exact) s.target = probe_forward(q, s.delta, s.task);
  const ProbeGrad z = probe_grad(q, exact, 0.1);
  CHECK(z.sv_bias.isZero(0.0));
  CHECK(z.sv_gender.isZero(0.0));
  CHECK(z.icpt_bias.isZero(0.0));
  CHECK(z.icpt_gender.isZero(0.0));
  CHECK((z.rotation - 0.1 * orthogonality_defect_grad(q.rotation)).isZero(1e-15));
}

TEST_CASE("probe validation and fingerprint") {
  Rng rng(8);
  JointProbe p = init_probe(4, rng);
  CHECK_NOTHROW(p.validate());
  CHECK(orthogonality_defect(p.rotation) <= 1e-12);
  CHECK(p.sv_bias.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(p.icpt_bias.isZero(0.0));
  const auto h = probe_fingerprint(p);
  p.sv_gender[2] += 1e-12;
  CHECK(probe_fingerprint(p) != h);
  p.sv_bias.resize(3);
  CHECK_THROWS_AS(p.validate(), DimensionError);
  CHECK(task_from_string(to_string(Task::Gender)) == Task::Gender);
  CHECK_THROWS_AS(task_from_string("both"), InputError);
}

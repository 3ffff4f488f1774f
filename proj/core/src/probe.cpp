#include "gprobe/probe.hpp"

#include <cmath>
#include <string>

#include "gprobe/checksum.hpp"
#include "gprobe/errors.hpp"

namespace gprobe {

std::string_view to_string(Task task) { return task == Task::Bias ? "bias" : "gender"; }

Task task_from_string(std::string_view name) {
  if (name == "bias") return Task::Bias;
  if (name == "gender") return Task::Gender;
  throw InputError("unknown task '" + std::string(name) + "' (expected bias or gender)");
}

void JointProbe::validate() const {
  const Index d = rotation.rows();
  if (d == 0 || rotation.cols() != d) {
    throw DimensionError("probe rotation must be a non-empty square matrix");
  }
  for (const Vector* v : {&sv_bias, &sv_gender, &icpt_bias, &icpt_gender}) {
    if (v->size() != d) {
      throw DimensionError("probe parameter of size " + std::to_string(v->size()) +
                           " does not match d = " + std::to_string(d));
    }
  }
}

ProbeGrad ProbeGrad::zeros(Index d) {
  return {Matrix::Zero(d, d), Vector::Zero(d), Vector::Zero(d), Vector::Zero(d), Vector::Zero(d)};
}

double ProbeGrad::squared_norm() const {
  return rotation.squaredNorm() + sv_bias.squaredNorm() + sv_gender.squaredNorm() +
         icpt_bias.squaredNorm() + icpt_gender.squaredNorm();
}

JointProbe init_probe(Index d, Rng& rng, double sv_scale) {
  if (d <= 0) throw DimensionError("init_probe: d must be positive");
  JointProbe p;
  p.rotation = random_orthogonal(d, rng);
  std::uniform_real_distribution<double> uni(-sv_scale, sv_scale);
  p.sv_bias.resize(d);
  p.sv_gender.resize(d);
  for (Index j = 0; j < d; ++j) p.sv_bias[j] = uni(rng);
  for (Index j = 0; j < d; ++j) p.sv_gender[j] = uni(rng);
  p.icpt_bias = Vector::Zero(d);
  p.icpt_gender = Vector::Zero(d);
  return p;
}

double probe_forward(const JointProbe& probe, const Vector& delta, Task task) {
  if (delta.size() != probe.dim()) {
    throw DimensionError("probe_forward: delta has dimension " + std::to_string(delta.size()) +
                         ", probe expects " + std::to_string(probe.dim()));
  }
  const Vector u = probe.scaling(task).cwiseProduct(probe.rotation * delta) - probe.intercept(task);
  return signed_norm(u);
}

namespace {

void check_batch(const JointProbe& probe, std::span<const ProbeSample> batch) {
  if (batch.empty()) throw InputError("probe loss: empty batch");
  for (const auto& s : batch) {
    if (s.delta.size() != probe.dim()) {
      throw DimensionError("probe loss: sample " + std::to_string(s.sentence_id) +
                           " has dimension " + std::to_string(s.delta.size()) +
                           ", probe expects " + std::to_string(probe.dim()));
    }
  }
}

}  // namespace

double probe_loss(const JointProbe& probe, std::span<const ProbeSample> batch, double lambda_o,
                  TaskWeights weights) {
  check_batch(probe, batch);
  double total = 0.0;
  for (const auto& s : batch) {
    total += weights[s.task] * std::abs(probe_forward(probe, s.delta, s.task) - s.target);
  }
  return total / static_cast<double>(batch.size()) + lambda_o * orthogonality_defect(probe.rotation);
}

double probe_loss_and_grad(const JointProbe& probe, std::span<const ProbeSample> batch,
                           double lambda_o, ProbeGrad& grad, TaskWeights weights) {
  check_batch(probe, batch);
  const Index d = probe.dim();
  grad = ProbeGrad::zeros(d);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  double total = 0.0;
  Vector z(d);
  Vector u(d);
  for (const auto& s : batch) {
    const Vector& sv = probe.scaling(s.task);
    z.noalias() = probe.rotation * s.delta;
    u = sv.cwiseProduct(z) - probe.intercept(s.task);
    const double residual = signed_norm(u) - s.target;
    const double w = weights[s.task];
    total += w * std::abs(residual);
    if (residual == 0.0) continue;

    const Vector g_u = (w * inv_n * (residual > 0.0 ? 1.0 : -1.0)) * signed_norm_grad(u);
    if (s.task == Task::Bias) {
      grad.sv_bias += g_u.cwiseProduct(z);
      grad.icpt_bias -= g_u;
    } else {
      grad.sv_gender += g_u.cwiseProduct(z);
      grad.icpt_gender -= g_u;
    }
    grad.rotation.noalias() += g_u.cwiseProduct(sv) * s.delta.transpose();
  }

  if (lambda_o == 0.0) return total * inv_n;
  Matrix g_o;
  const double defect = orthogonality_defect_and_grad(probe.rotation, g_o);
  grad.rotation += lambda_o * g_o;
  return total * inv_n + lambda_o * defect;
}

ProbeGrad probe_grad(const JointProbe& probe, std::span<const ProbeSample> batch, double lambda_o,
                     TaskWeights weights) {
  ProbeGrad grad;
  probe_loss_and_grad(probe, batch, lambda_o, grad, weights);
  return grad;
}

std::uint32_t probe_fingerprint(const JointProbe& probe) {
  auto feed = [](std::uint32_t crc, const double* data, Index n) {
    return crc32(std::as_bytes(std::span(data, static_cast<std::size_t>(n))), crc);
  };
  std::uint32_t crc = 0;
  crc = feed(crc, probe.rotation.data(), probe.rotation.size());
  crc = feed(crc, probe.sv_bias.data(), probe.sv_bias.size());
  crc = feed(crc, probe.sv_gender.data(), probe.sv_gender.size());
  crc = feed(crc, probe.icpt_bias.data(), probe.icpt_bias.size());
  crc = feed(crc, probe.icpt_gender.data(), probe.icpt_gender.size());
  return crc;
}

}  // namespace gprobe

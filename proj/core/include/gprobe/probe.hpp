#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "gprobe/numerics.hpp"

namespace gprobe {

/// Which probing objective a sample (or parameter set) belongs to.
enum class Task : std::uint8_t {
  Bias = 0,    // noun bias read at the masked pronoun (target: noun RGP)
  Gender = 1,  // factual gender read at the masked noun (target: -1, 0, +1)
};

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

/// Shared orthogonal map with one scaling vector and one intercept per task.
struct JointProbe {
  Matrix rotation;    // d x d, orthogonal after finalization
  Vector sv_bias;     // scaling vector of the bias task
  Vector sv_gender;   // scaling vector of the factual-gender task
  Vector icpt_bias;
  Vector icpt_gender;
  int layer = -1;

  Index dim() const { return rotation.rows(); }
  const Vector& scaling(Task task) const { return task == Task::Bias ? sv_bias : sv_gender; }
  const Vector& intercept(Task task) const {
    return task == Task::Bias ? icpt_bias : icpt_gender;
  }

  /// Throws DimensionError unless every parameter has dimension d.
  void validate() const;

  /// Parameter count: d^2 + 4d.
  Index parameter_count() const { return dim() * dim() + 4 * dim(); }
};

/// A representation difference (signal minus both-masked baseline) and its
/// scalar target.
struct ProbeSample {
  Vector delta;
  double target = 0.0;
  Task task = Task::Bias;
  std::uint32_t sentence_id = 0;
};

/// Relative weights of the two absolute-error terms in the joint objective.
struct TaskWeights {
  double bias = 1.0;
  double gender = 1.0;
  double operator[](Task task) const { return task == Task::Bias ? bias : gender; }
};

/// Gradient of probe_loss, shaped like JointProbe.
struct ProbeGrad {
  Matrix rotation;
  Vector sv_bias;
  Vector sv_gender;
  Vector icpt_bias;
  Vector icpt_gender;

  static ProbeGrad zeros(Index d);
  double squared_norm() const;
};

/// Random orthogonal rotation, scaling vectors uniform in [-sv_scale, sv_scale],
/// zero intercepts.
JointProbe init_probe(Index d, Rng& rng, double sv_scale = 0.05);

/// signed_norm(SV_task * (O delta) - i_task).
double probe_forward(const JointProbe& probe, const Vector& delta, Task task);

/// Mean weighted absolute error over the batch plus lambda_o * ||O^T O - I||_F.
double probe_loss(const JointProbe& probe, std::span<const ProbeSample> batch, double lambda_o,
                  TaskWeights weights = {});

/// Analytic gradient of probe_loss; the subgradient of |.| at 0 is 0.
ProbeGrad probe_grad(const JointProbe& probe, std::span<const ProbeSample> batch,
                     double lambda_o, TaskWeights weights = {});

/// Loss and gradient in one pass over the batch.
double probe_loss_and_grad(const JointProbe& probe, std::span<const ProbeSample> batch,
                           double lambda_o, ProbeGrad& grad, TaskWeights weights = {});

/// CRC-32 over the probe's parameters, used as provenance in filter files.
std::uint32_t probe_fingerprint(const JointProbe& probe);

}  // namespace gprobe

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gprobe/probe.hpp"

namespace gprobe {

/// Optimization regimen for one layer's joint probe.
struct TrainConfig {
  std::size_t batch_size = 10;
  double lr = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;
  bool clip_per_tensor = false;  // default: one global norm over all parameters
  double lambda_o = 0.1;
  int patience_epochs = 3;       // non-improving epochs before the first decay
  int patience_after_decay = 3;  // non-improving epochs before each later decay or the stop
  double decay_factor = 10.0;
  int max_decays = 3;            // the next patience exhaustion after this many decays stops
  int max_epochs = 200;
  TaskWeights task_weights{};
  double sv_init_scale = 0.05;
  double sv_l1 = 0.1;  // soft threshold on both scaling vectors, in units of lr, after each step
  std::uint64_t seed = 0;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // <= 0 disables clipping
  bool per_tensor = false;

  static AdamConfig from(const TrainConfig& c) {
    return {c.beta1, c.beta2, c.adam_eps, c.clip_norm, c.clip_per_tensor};
  }
};

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;

  static AdamState zeros(Index n) { return {Vector::Zero(n), Vector::Zero(n), 0}; }
};

/// Clips `grad` in place. With per_tensor the norm is taken separately over
/// each consecutive segment of the given sizes; otherwise over the whole
/// vector. Returns the pre-clip global norm.
double clip_gradient(Vector& grad, std::span<const Index> segments, double clip_norm,
                     bool per_tensor);

/// One bias-corrected Adam update of `params`, after clipping the gradient.
/// Throws DimensionError on shape mismatch.
void adam_step(AdamState& state, Vector& params, Vector grad, double lr, const AdamConfig& config,
               std::span<const Index> segments = {});

/// Flat parameter layout used by the optimizer: rotation (column-major),
/// sv_bias, sv_gender, icpt_bias, icpt_gender.
Vector pack_parameters(const JointProbe& probe);
void unpack_parameters(const Vector& flat, JointProbe& probe);
Vector pack_gradient(const ProbeGrad& grad);
std::vector<Index> parameter_segments(Index d);

/// Patience-based learning-rate decay followed by early stopping.
///
/// When the validation loss fails to improve for `patience` consecutive
/// epochs (`patience_after_decay` once a decay has happened) the learning
/// rate is decayed; the first exhaustion after `max_decays` decays stops
/// training.
class EarlyStopping {
 public:
  enum class Action { Continue, Decay, Stop };

  EarlyStopping(int patience, int patience_after_decay, int max_decays);

  /// Feed one epoch's validation loss.
  Action observe(double dev_loss);

  bool last_improved() const { return last_improved_; }
  double best() const { return best_; }
  int decays() const { return decays_; }

 private:
  int patience_;
  int patience_after_decay_;
  int max_decays_;
  int decays_ = 0;
  int bad_epochs_ = 0;
  double best_;
  bool last_improved_ = false;
};

enum class StopReason { EarlyStop, MaxEpochs };
std::string_view to_string(StopReason reason);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;
  double defect = 0.0;  // orthogonality defect of the rotation after the epoch
  bool improved = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  StopReason stop = StopReason::MaxEpochs;
  int best_epoch = -1;
  int decays = 0;
  double pre_projection_defect = 0.0;
  double post_projection_defect = 0.0;
};

struct TrainResult {
  JointProbe probe;
  TrainHistory history;
};

/// Trains a joint probe on both tasks with Adam, restores the parameters of
/// the best validation epoch and projects the rotation onto the orthogonal
/// group. Throws InputError on an empty split or when a split lacks one of
/// the tasks, NumericalError on a non-finite loss.
TrainResult train_joint_probe(std::span<const ProbeSample> train, std::span<const ProbeSample> dev,
                              const TrainConfig& config);

struct ProbeEvaluation {
  double pearson = 0.0;
  double mae = 0.0;
  std::size_t count = 0;
};

/// Pearson correlation and mean absolute error between probe predictions and
/// targets over the samples of `task`. Throws NumericalError when the
/// correlation is undefined (fewer than two samples, constant values).
ProbeEvaluation evaluate_probe(const JointProbe& probe, std::span<const ProbeSample> samples,
                               Task task);

}  // namespace gprobe

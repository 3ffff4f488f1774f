#include "gprobe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gprobe/errors.hpp"
#include "gprobe/metrics.hpp"

namespace gprobe {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InputError(std::string("invalid training config: ") + what);
  };
  require(batch_size > 0, "batch_size must be positive");
  require(lr > 0.0, "lr must be positive");
  require(beta1 > 0.0 && beta1 < 1.0, "beta1 must lie in (0, 1)");
  require(beta2 > 0.0 && beta2 < 1.0, "beta2 must lie in (0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(lambda_o >= 0.0, "lambda_o must be nonnegative");
  require(patience_epochs >= 1, "patience_epochs must be at least 1");
  require(patience_after_decay >= 1, "patience_after_decay must be at least 1");
  require(decay_factor > 1.0, "decay_factor must exceed 1");
  require(max_decays >= 0, "max_decays must be nonnegative");
  require(max_epochs >= 1, "max_epochs must be at least 1");
  require(task_weights.bias > 0.0 && task_weights.gender > 0.0, "task weights must be positive");
  require(sv_init_scale > 0.0, "sv_init_scale must be positive");
  require(sv_l1 >= 0.0, "sv_l1 must be nonnegative");
}

double clip_gradient(Vector& grad, std::span<const Index> segments, double clip_norm,
                     bool per_tensor) {
  const double global = grad.norm();
  if (clip_norm <= 0.0) return global;
  if (!per_tensor || segments.empty()) {
    if (global > clip_norm) grad *= clip_norm / global;
    return global;
  }
  Index offset = 0;
  for (Index len : segments) {
    auto seg = grad.segment(offset, len);
    const double n = seg.norm();
    if (n > clip_norm) seg *= clip_norm / n;
    offset += len;
  }
  return global;
}

void adam_step(AdamState& state, Vector& params, Vector grad, double lr, const AdamConfig& config,
               std::span<const Index> segments) {
  if (grad.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!segments.empty() &&
      std::accumulate(segments.begin(), segments.end(), Index{0}) != params.size()) {
    throw DimensionError("adam_step: segment sizes do not cover the parameter vector");
  }
  clip_gradient(grad, segments, config.clip_norm, config.per_tensor);

  state.step += 1;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (Index k = 0; k < params.size(); ++k) {
    const double m_hat = state.m[k] / bc1;
    const double v_hat = state.v[k] / bc2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

std::vector<Index> parameter_segments(Index d) { return {d * d, d, d, d, d}; }

Vector pack_parameters(const JointProbe& p) {
  const Index d = p.dim();
  Vector flat(d * d + 4 * d);
  flat.head(d * d) = p.rotation.reshaped();
  flat.segment(d * d, d) = p.sv_bias;
  flat.segment(d * d + d, d) = p.sv_gender;
  flat.segment(d * d + 2 * d, d) = p.icpt_bias;
  flat.segment(d * d + 3 * d, d) = p.icpt_gender;
  return flat;
}

void unpack_parameters(const Vector& flat, JointProbe& p) {
  const Index d = p.dim();
  if (flat.size() != d * d + 4 * d) {
    throw DimensionError("unpack_parameters: flat vector does not match probe dimension");
  }
  p.rotation = flat.head(d * d).reshaped(d, d);
  p.sv_bias = flat.segment(d * d, d);
  p.sv_gender = flat.segment(d * d + d, d);
  p.icpt_bias = flat.segment(d * d + 2 * d, d);
  p.icpt_gender = flat.segment(d * d + 3 * d, d);
}

Vector pack_gradient(const ProbeGrad& g) {
  const Index d = g.rotation.rows();
  Vector flat(d * d + 4 * d);
  flat.head(d * d) = g.rotation.reshaped();
  flat.segment(d * d, d) = g.sv_bias;
  flat.segment(d * d + d, d) = g.sv_gender;
  flat.segment(d * d + 2 * d, d) = g.icpt_bias;
  flat.segment(d * d + 3 * d, d) = g.icpt_gender;
  return flat;
}

EarlyStopping::EarlyStopping(int patience, int patience_after_decay, int max_decays)
    : patience_(patience),
      patience_after_decay_(patience_after_decay),
      max_decays_(max_decays),
      best_(std::numeric_limits<double>::infinity()) {}

EarlyStopping::Action EarlyStopping::observe(double dev_loss) {
  if (dev_loss < best_) {
    best_ = dev_loss;
    bad_epochs_ = 0;
    last_improved_ = true;
    return Action::Continue;
  }
  last_improved_ = false;
  ++bad_epochs_;
  const int limit = decays_ == 0 ? patience_ : patience_after_decay_;
  if (bad_epochs_ < limit) return Action::Continue;
  bad_epochs_ = 0;
  if (decays_ < max_decays_) {
    ++decays_;
    return Action::Decay;
  }
  return Action::Stop;
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
}

namespace {

void check_split(std::span<const ProbeSample> samples, const char* name) {
  if (samples.empty()) throw InputError(std::string("train_joint_probe: empty ") + name + " split");
  bool has_bias = false;
  bool has_gender = false;
  const Index d = samples.front().delta.size();
  for (const auto& s : samples) {
    (s.task == Task::Bias ? has_bias : has_gender) = true;
    if (s.delta.size() != d) {
      throw DimensionError(std::string("train_joint_probe: inconsistent sample dimensions in ") +
                           name + " split");
    }
  }
  if (!has_bias || !has_gender) {
    throw InputError(std::string("train_joint_probe: ") + name +
                     " split must contain samples of both tasks");
  }
}

// Single-task batches, alternating between the two task pools until both are
// exhausted. Together the batches cover every training sample once.
std::vector<std::vector<std::size_t>> make_batches(std::span<const ProbeSample> train,
                                                   std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> bias;
  std::vector<std::size_t> gender;
  for (std::size_t k = 0; k < train.size(); ++k) {
    (train[k].task == Task::Bias ? bias : gender).push_back(k);
  }
  std::shuffle(bias.begin(), bias.end(), rng);
  std::shuffle(gender.begin(), gender.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  std::size_t bi = 0;
  std::size_t gi = 0;
  bool take_bias = true;
  while (bi < bias.size() || gi < gender.size()) {
    auto& pool = take_bias ? bias : gender;
    auto& pos = take_bias ? bi : gi;
    if (pos < pool.size()) {
      const std::size_t end = std::min(pool.size(), pos + batch_size);
      batches.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(pos),
                           pool.begin() + static_cast<std::ptrdiff_t>(end));
      pos = end;
    }
    take_bias = !take_bias;
  }
  return batches;
}

void soft_threshold_scaling(Vector& params, Index d, double threshold) {
  auto sv = params.segment(d * d, 2 * d);
  for (Index k = 0; k < sv.size(); ++k) {
    const double mag = std::abs(sv[k]) - threshold;
    sv[k] = mag > 0.0 ? std::copysign(mag, sv[k]) : 0.0;
  }
}

}  // namespace

TrainResult train_joint_probe(std::span<const ProbeSample> train, std::span<const ProbeSample> dev,
                              const TrainConfig& config) {
  config.validate();
  check_split(train, "train");
  check_split(dev, "dev");
  const Index d = train.front().delta.size();
  if (dev.front().delta.size() != d) {
    throw DimensionError("train_joint_probe: train and dev dimensions differ");
  }

  Rng rng(config.seed);
  JointProbe probe = init_probe(d, rng, config.sv_init_scale);
  const auto segments = parameter_segments(d);
  const AdamConfig adam = AdamConfig::from(config);
  AdamState state = AdamState::zeros(probe.parameter_count());
  Vector params = pack_parameters(probe);
  Vector best_params = params;

  EarlyStopping stopper(config.patience_epochs, config.patience_after_decay, config.max_decays);
  TrainHistory history;
  double lr = config.lr;
  std::vector<ProbeSample> batch;
  ProbeGrad grad;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    double train_total = 0.0;
    std::size_t train_count = 0;
    for (const auto& idx : make_batches(train, config.batch_size, rng)) {
      batch.clear();
      for (std::size_t k : idx) batch.push_back(train[k]);
      const double loss =
          probe_loss_and_grad(probe, batch, config.lambda_o, grad, config.task_weights);
      if (!std::isfinite(loss)) {
        throw NumericalError("train_joint_probe: non-finite training loss at epoch " +
                             std::to_string(epoch));
      }
      train_total += loss * static_cast<double>(batch.size());
      train_count += batch.size();
      adam_step(state, params, pack_gradient(grad), lr, adam, segments);
      if (config.sv_l1 > 0.0) soft_threshold_scaling(params, d, lr * config.sv_l1);
      unpack_parameters(params, probe);
    }

    const double dev_loss = probe_loss(probe, dev, config.lambda_o, config.task_weights);
    if (!std::isfinite(dev_loss)) {
      throw NumericalError("train_joint_probe: non-finite validation loss at epoch " +
                           std::to_string(epoch));
    }
    const auto action = stopper.observe(dev_loss);
    history.epochs.push_back({epoch, train_total / static_cast<double>(train_count), dev_loss, lr,
                              orthogonality_defect(probe.rotation), stopper.last_improved()});
    if (stopper.last_improved()) {
      best_params = params;
      history.best_epoch = epoch;
    }
    if (action == EarlyStopping::Action::Decay) {
      lr /= config.decay_factor;
    } else if (action == EarlyStopping::Action::Stop) {
      history.stop = StopReason::EarlyStop;
      break;
    }
  }
  history.decays = stopper.decays();

  unpack_parameters(best_params, probe);
  history.pre_projection_defect = orthogonality_defect(probe.rotation);
  probe.rotation = nearest_orthogonal(probe.rotation);
  history.post_projection_defect = orthogonality_defect(probe.rotation);
  return {std::move(probe), std::move(history)};
}

ProbeEvaluation evaluate_probe(const JointProbe& probe, std::span<const ProbeSample> samples,
                               Task task) {
  std::vector<double> predicted;
  std::vector<double> gold;
  for (const auto& s : samples) {
    if (s.task != task) continue;
    predicted.push_back(probe_forward(probe, s.delta, task));
    gold.push_back(s.target);
  }
  ProbeEvaluation eval;
  eval.count = predicted.size();
  eval.pearson = pearson(predicted, gold);
  double abs_err = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) abs_err += std::abs(predicted[k] - gold[k]);
  eval.mae = abs_err / static_cast<double>(predicted.size());
  return eval;
}

}  // namespace gprobe

#pragma once

#include <cstdint>
#include <vector>

#include "gprobe/probe.hpp"

namespace gprobe {

/// Synthetic representation differences with planted bias and gender
/// subspaces.
///
/// In a hidden rotated basis the bias support is coordinates
/// [0, k_bias) and the gender support is [k_bias - k_shared,
/// k_bias - k_shared + k_gender), so the two share k_shared coordinates.
/// A bias sample carries b * w_bias on the bias support, a gender sample
/// carries f * w_gender on the gender support, where w_* are fixed
/// nonnegative unit vectors whose first entry is the largest. Every
/// coordinate additionally receives N(0, noise_sigma) noise, and coordinates
/// outside both supports receive N(0, nuisance_sigma) on top. Samples are
/// returned in the original basis, delta = Q^T z.
struct SynthConfig {
  Index d = 64;
  Index k_bias = 8;
  Index k_gender = 8;
  Index k_shared = 4;
  std::size_t n_samples = 2000;  // total; tasks alternate bias, gender, ...
  double noise_sigma = 0.01;
  double nuisance_sigma = 0.0;  // extra variance off both supports
  double bias_min = -2.0;
  double bias_max = 2.0;
  std::uint64_t seed = 0;

  /// Throws InputError when the supports do not fit in d or the noise is
  /// negative.
  void validate() const;
};

struct SynthTruth {
  Matrix rotation;  // Q: original basis -> planted basis
  std::vector<Index> bias_support;
  std::vector<Index> gender_support;
  Vector bias_weights;    // length d, zero off the bias support, unit norm
  Vector gender_weights;  // length d, zero off the gender support, unit norm

  /// Planted signal directions in the original basis.
  Vector bias_direction() const { return rotation.transpose() * bias_weights; }
  Vector gender_direction() const { return rotation.transpose() * gender_weights; }
};

struct SynthData {
  std::vector<ProbeSample> samples;
  SynthTruth truth;
};

SynthData generate_synthetic(const SynthConfig& config);

/// The probe the data was planted for: O = Q, scaling vectors are the support
/// indicators, zero intercepts. Exact at zero noise.
JointProbe ground_truth_probe(const SynthTruth& truth);

/// Fraction of the energy of `direction` lying in the span of the rotated
/// coordinates whose |scaling| >= epsilon, i.e. ||P direction||^2 /
/// ||direction||^2 with P the projector onto those rows of O.
double recovered_energy(const JointProbe& probe, Task task, const Vector& direction,
                        double epsilon);

}  // namespace gprobe

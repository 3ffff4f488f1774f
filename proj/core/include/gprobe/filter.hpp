#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gprobe/probe.hpp"

namespace gprobe {

enum class FilterKind {
  BiasOnly,        // drop every dimension the bias probe uses
  BiasKeepGender,  // ... except those weighted more by the gender probe
  GenderOnly,      // drop every dimension the gender probe uses (diagnostic)
};

std::string_view to_string(FilterKind kind);
FilterKind filter_kind_from_string(std::string_view name);

struct FilterSpec {
  FilterKind kind = FilterKind::BiasOnly;
  double epsilon = 1e-12;
  int layer = -1;

  /// Throws InputError unless epsilon is positive and finite.
  void validate() const;
};

/// A filter exported in affine form: h -> M h + c.
///
/// M = O^T diag(mask) O and c = O^T (|SV| * i), with (SV, i) taken from the
/// bias task for BiasOnly/BiasKeepGender and from the gender task for
/// GenderOnly.
struct AffineFilter {
  Matrix projection;                // M, d x d
  Vector offset;                    // c
  std::vector<std::uint8_t> mask;   // 1 = rotated coordinate kept
  FilterSpec spec;
  std::uint32_t probe_hash = 0;
  std::string model_id;

  Index dim() const { return projection.rows(); }
  std::size_t kept() const;
  std::size_t removed() const { return mask.size() - kept(); }
};

/// Default orthogonality tolerance a probe must meet to be filtered.
inline constexpr double kFinalizedDefectTolerance = 1e-10;

/// The binary mask of `spec.kind` over the probe's rotated coordinates.
std::vector<std::uint8_t> filter_mask(const JointProbe& probe, const FilterSpec& spec);

/// Throws InputError if the probe's rotation is not orthogonal within
/// `defect_tolerance` (the probe was not finalized).
AffineFilter build_filter(const JointProbe& probe, const FilterSpec& spec,
                          double defect_tolerance = kFinalizedDefectTolerance);

/// M h + c. Throws DimensionError on a size mismatch.
Vector apply_filter(const AffineFilter& filter, const Vector& h);

/// Applies the linear part only, M delta: the effect of the filter on a
/// difference of two filtered representations.
Vector apply_filter_to_difference(const AffineFilter& filter, const Vector& delta);

struct DimensionOverlap {
  std::size_t bias_only = 0;    // |SV_bias| >= eps, |SV_gender| < eps
  std::size_t gender_only = 0;  // |SV_gender| >= eps, |SV_bias| < eps
  std::size_t shared = 0;       // both >= eps
};

DimensionOverlap filter_overlap(const JointProbe& probe, double epsilon);

}  // namespace gprobe

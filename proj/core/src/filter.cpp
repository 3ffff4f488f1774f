#include "gprobe/filter.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gprobe/errors.hpp"

namespace gprobe {

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::BiasOnly: return "bias_only";
    case FilterKind::BiasKeepGender: return "bias_keep_gender";
    case FilterKind::GenderOnly: return "gender_only";
  }
  return "unknown";
}

FilterKind filter_kind_from_string(std::string_view name) {
  if (name == "bias_only") return FilterKind::BiasOnly;
  if (name == "bias_keep_gender") return FilterKind::BiasKeepGender;
  if (name == "gender_only") return FilterKind::GenderOnly;
  throw InputError("unknown filter kind '" + std::string(name) +
                   "' (expected bias_only, bias_keep_gender or gender_only)");
}

void FilterSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InputError("filter epsilon must be positive and finite");
  }
}

std::size_t AffineFilter::kept() const {
  return static_cast<std::size_t>(std::accumulate(mask.begin(), mask.end(), 0));
}

std::vector<std::uint8_t> filter_mask(const JointProbe& probe, const FilterSpec& spec) {
  probe.validate();
  spec.validate();
  const double eps = spec.epsilon;
  const Index d = probe.dim();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(d), 0);
  for (Index j = 0; j < d; ++j) {
    const double sb = std::abs(probe.sv_bias[j]);
    const double sg = std::abs(probe.sv_gender[j]);
    bool keep = false;
    switch (spec.kind) {
      case FilterKind::BiasOnly: keep = eps > sb; break;
      case FilterKind::BiasKeepGender: keep = eps > sb || (eps <= sb && sb < sg); break;
      case FilterKind::GenderOnly: keep = eps > sg; break;
    }
    mask[static_cast<std::size_t>(j)] = keep ? 1 : 0;
  }
  return mask;
}

AffineFilter build_filter(const JointProbe& probe, const FilterSpec& spec,
                          double defect_tolerance) {
  probe.validate();
  const double defect = orthogonality_defect(probe.rotation);
  if (!(defect <= defect_tolerance)) {
    throw InputError("build_filter: probe rotation is not orthogonal (defect " +
                     std::to_string(defect) + "); finalize the probe first");
  }

  AffineFilter f;
  f.spec = spec;
  f.mask = filter_mask(probe, spec);
  f.probe_hash = probe_fingerprint(probe);

  const Index d = probe.dim();
  Vector keep(d);
  for (Index j = 0; j < d; ++j) keep[j] = f.mask[static_cast<std::size_t>(j)];
  const Matrix& o = probe.rotation;
  f.projection = o.transpose() * keep.asDiagonal() * o;
  // Exact symmetry; the product above is symmetric only up to rounding.
  f.projection = 0.5 * (f.projection + f.projection.transpose()).eval();

  const Task source = spec.kind == FilterKind::GenderOnly ? Task::Gender : Task::Bias;
  f.offset = o.transpose() * probe.scaling(source).cwiseAbs().cwiseProduct(probe.intercept(source));
  return f;
}

Vector apply_filter(const AffineFilter& filter, const Vector& h) {
  return apply_filter_to_difference(filter, h) + filter.offset;
}

Vector apply_filter_to_difference(const AffineFilter& filter, const Vector& delta) {
  if (delta.size() != filter.dim()) {
    throw DimensionError("apply_filter: vector has dimension " + std::to_string(delta.size()) +
                         ", filter expects " + std::to_string(filter.dim()));
  }
  return filter.projection * delta;
}

DimensionOverlap filter_overlap(const JointProbe& probe, double epsilon) {
  probe.validate();
  DimensionOverlap out;
  for (Index j = 0; j < probe.dim(); ++j) {
    const bool b = std::abs(probe.sv_bias[j]) >= epsilon;
    const bool g = std::abs(probe.sv_gender[j]) >= epsilon;
    if (b && g) {
      ++out.shared;
    } else if (b) {
      ++out.bias_only;
    } else if (g) {
      ++out.gender_only;
    }
  }
  return out;
}

}  // namespace gprobe

#pragma once

#include <cstdint>
#include <vector>

#include "maploc/image.hpp"

namespace maploc {

/// Occlusion-estimation filter parameters.
///
/// A projected point P_j is hidden when some strictly closer point P_i inside
/// the window x window pixel neighbourhood lies within `angle_min` of the line
/// of sight from P_j to the pinhole, i.e. acos(v . c) < angle_min with
/// v = unit(pinhole - P_j) and c = unit(P_i - P_j).
struct OcclusionParams {
  int window = 5;
  double threshold = 3.0;  ///< opaque cone threshold, see angle_from_threshold
  double angle_min = 0.0;  ///< radians, in (0, pi/2)

  /// Parameters from the published (window, threshold) pair.
  static OcclusionParams from_threshold(int window, double threshold);
  void validate() const;
};

/// Maps the unitless cone threshold to the decision angle:
/// angle_min = pi/2 - atan(threshold). Larger thresholds filter less.
double angle_from_threshold(double threshold);

struct VisibilityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> visible;  ///< 1 = visible; zero-depth pixels are 0

  bool at(int u, int v) const { return visible[static_cast<std::size_t>(v) * width + u] != 0; }
  bool operator==(const VisibilityMask&) const = default;
};

/// Filtered copy of `img`: occluded pixels set to zero. Rows are processed by
/// `workers` threads; the output does not depend on the worker count.
DepthImage occlusion_filter(const DepthImage& img, const OcclusionParams& params, int workers = 1);

/// Visibility computed by the plain O(N * window^2) double loop (reference).
VisibilityMask brute_force_visibility(const DepthImage& img, const OcclusionParams& params);

/// Mask of nonzero pixels of an image (what occlusion_filter kept).
VisibilityMask nonzero_mask(const DepthImage& img);

}  // namespace maploc

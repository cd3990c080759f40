#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maploc/se3.hpp"

namespace maploc {

struct AxisStats {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  ///< population standard deviation
  double min = 0.0;
  double max = 0.0;
};

/// Exact statistics (full sort; even counts average the two middle values).
/// Throws InvalidArgument on empty input.
AxisStats summarize_values(std::span<const double> values);

struct ErrorSummary {
  std::size_t count = 0;
  std::array<AxisStats, 6> axes;  ///< indexed by ErrorAxis
  AxisStats translation_norm;
  AxisStats total_angle;
};

ErrorSummary summarize(std::span<const PoseError> errors);

/// Column names of the six error components, in ErrorAxis order.
const std::array<std::string, 6>& error_axis_names();

/// Summaries keyed by stage; angles are reported in degrees.
std::string summary_to_csv(std::span<const ErrorSummary> per_stage);
std::string summary_to_json(std::span<const ErrorSummary> per_stage);

struct KdeCurve {
  std::vector<double> x;
  std::vector<double> density;
};

/// Gaussian kernel density sampled at `points` evenly spaced positions over
/// [min - 4h, max + 4h]. Throws InvalidArgument for h <= 0, empty input or
/// fewer than 2 points.
KdeCurve kde_pdf(std::span<const double> samples, double bandwidth, std::size_t points = 512);

/// Silverman's rule: 0.9 * min(std, IQR / 1.34) * n^(-1/5). Falls back to
/// whichever spread is nonzero, and to 1e-3 for constant samples.
double silverman_bandwidth(std::span<const double> samples);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// One panel per error component. Every curve is drawn solid; the uniform
/// density of the initial noise (half-width per panel, 0 to omit) is dashed.
struct KdePanelSet {
  std::vector<std::string> curve_labels;
  std::vector<std::array<std::vector<double>, 6>> samples;  ///< per curve, per axis (m / deg)
  std::array<double, 6> uniform_half_width{};               ///< m / deg
};
std::string kde_svg(const KdePanelSet& panels);

/// Timings of one pipeline execution, in milliseconds.
struct TimingSample {
  double z_buffer_ms = 0.0;
  double occlusion_ms = 0.0;
  double regressor_ms = 0.0;
  double total_ms = 0.0;
};

struct TimingBreakdown {
  std::vector<TimingSample> samples;
  TimingSample mean() const;
  TimingSample median() const;
};

/// Published GPU figures, reported next to measurements and never compared.
inline constexpr TimingSample kReferenceGpuTimings{8.6, 1.4, 4.6, 14.7};

struct BenchmarkOptions {
  int warmup = 3;  ///< must be >= 3; excluded from the result
  int repetitions = 20;
};

/// The three timed steps of one execution. The callbacks run in this order;
/// each sees the output of the previous one through captured state.
struct BenchmarkSteps {
  std::function<void()> z_buffer;
  std::function<void()> occlusion;
  std::function<void()> regressor;
};

/// Runs `warmup` untimed executions, then times `repetitions` executions with
/// a monotonic clock, sequentially on the calling thread.
TimingBreakdown run_benchmark(const BenchmarkSteps& steps, const BenchmarkOptions& options);

/// Columns: z_buffer_ms, occlusion_ms, regressor_ms, total_ms. Rows: mean,
/// median, and the reference figures.
std::string timing_to_csv(const TimingBreakdown& t);
std::string timing_to_json(const TimingBreakdown& t);

}  // namespace maploc

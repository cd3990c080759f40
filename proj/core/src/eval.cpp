#include "maploc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "maploc/error.hpp"
#include "text_util.hpp"

namespace maploc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double median_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

AxisStats summarize_values(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("summarize: no samples");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  AxisStats s;
  s.min = v.front();
  s.max = v.back();
  s.median = median_of_sorted(v);
  // summing in sorted order keeps the result independent of input order
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

ErrorSummary summarize(std::span<const PoseError> errors) {
  if (errors.empty()) throw InvalidArgument("summarize: no samples");
  ErrorSummary out;
  out.count = errors.size();
  std::vector<double> col(errors.size());
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t i = 0; i < errors.size(); ++i) col[i] = errors[i].components[a];
    out.axes[a] = summarize_values(col);
  }
  for (std::size_t i = 0; i < errors.size(); ++i) col[i] = errors[i].translation_norm();
  out.translation_norm = summarize_values(col);
  for (std::size_t i = 0; i < errors.size(); ++i) col[i] = errors[i].total_angle;
  out.total_angle = summarize_values(col);
  return out;
}

const std::array<std::string, 6>& error_axis_names() {
  static const std::array<std::string, 6> names{"longitudinal_m", "lateral_m", "vertical_m",
                                                "roll_deg", "pitch_deg", "yaw_deg"};
  return names;
}

namespace {

AxisStats scaled(const AxisStats& s, double k) {
  return {s.median * k, s.mean * k, s.stddev * k, s.min * k, s.max * k};
}

std::vector<std::pair<std::string, AxisStats>> report_columns(const ErrorSummary& s) {
  std::vector<std::pair<std::string, AxisStats>> cols;
  for (std::size_t a = 0; a < 6; ++a) {
    cols.emplace_back(error_axis_names()[a], a < 3 ? s.axes[a] : scaled(s.axes[a], 1.0 / kDeg));
  }
  cols.emplace_back("translation_m", s.translation_norm);
  cols.emplace_back("total_angle_deg", scaled(s.total_angle, 1.0 / kDeg));
  return cols;
}

}  // namespace

std::string summary_to_csv(std::span<const ErrorSummary> per_stage) {
  std::ostringstream out;
  out << "stage,quantity,count,median,mean,std,min,max\n";
  for (std::size_t st = 0; st < per_stage.size(); ++st) {
    for (const auto& [name, a] : report_columns(per_stage[st])) {
      out << st << ',' << name << ',' << per_stage[st].count << ',' << fmt(a.median) << ','
          << fmt(a.mean) << ',' << fmt(a.stddev) << ',' << fmt(a.min) << ',' << fmt(a.max) << '\n';
    }
  }
  return out.str();
}

std::string summary_to_json(std::span<const ErrorSummary> per_stage) {
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (std::size_t st = 0; st < per_stage.size(); ++st) {
    nlohmann::ordered_json s;
    s["stage"] = st;
    s["count"] = per_stage[st].count;
    for (const auto& [name, a] : report_columns(per_stage[st])) {
      s[name] = {{"median", a.median}, {"mean", a.mean}, {"std", a.stddev},
                 {"min", a.min},       {"max", a.max}};
    }
    stages.push_back(s);
  }
  return stages.dump(2) + "\n";
}

KdeCurve kde_pdf(std::span<const double> samples, double bandwidth, std::size_t points) {
  if (samples.empty()) throw InvalidArgument("kde_pdf: no samples");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("kde_pdf: bandwidth must be positive");
  }
  if (points < 2) throw InvalidArgument("kde_pdf: need at least 2 grid points");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 4.0 * bandwidth;
  const double hi = *hi_it + 4.0 * bandwidth;
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  KdeCurve c;
  c.x.resize(points);
  c.density.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    double sum = 0.0;
    for (const double s : samples) {
      const double z = (x - s) / bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    c.x[i] = x;
    c.density[i] = sum * norm;
  }
  return c;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("silverman_bandwidth: no samples");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const AxisStats s = summarize_values(v);
  const double iqr = (quantile(v, 0.75) - quantile(v, 0.25)) / 1.34;
  double spread = std::min(s.stddev, iqr);
  if (spread <= 0.0) spread = std::max(s.stddev, iqr);
  if (spread <= 0.0) return 1e-3;
  return 0.9 * spread * std::pow(static_cast<double>(v.size()), -0.2);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("trapezoid: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

std::string kde_svg(const KdePanelSet& panels) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  constexpr int kPanelW = 300, kPanelH = 200, kMargin = 40;
  constexpr int kWidth = 3 * kPanelW, kHeight = 2 * kPanelH + 30;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t axis = 0; axis < 6; ++axis) {
    const int ox = static_cast<int>(axis % 3) * kPanelW;
    const int oy = static_cast<int>(axis / 3) * kPanelH;
    const int pw = kPanelW - 2 * kMargin / 2 - 10, ph = kPanelH - kMargin - 10;
    const int px0 = ox + kMargin / 2 + 5, py0 = oy + 20;

    std::vector<KdeCurve> curves;
    double xmin = 0.0, xmax = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& per_axis : panels.samples) {
      const auto& s = per_axis[axis];
      if (s.empty()) {
        curves.emplace_back();
        continue;
      }
      curves.push_back(kde_pdf(s, silverman_bandwidth(s), 256));
      const KdeCurve& c = curves.back();
      xmin = first ? c.x.front() : std::min(xmin, c.x.front());
      xmax = first ? c.x.back() : std::max(xmax, c.x.back());
      ymax = std::max(ymax, *std::max_element(c.density.begin(), c.density.end()));
      first = false;
    }
    const double u = panels.uniform_half_width[axis];
    if (u > 0.0) {
      xmin = first ? -u : std::min(xmin, -u);
      xmax = first ? u : std::max(xmax, u);
      ymax = std::max(ymax, 1.0 / (2.0 * u));
      first = false;
    }
    if (first || xmax <= xmin || ymax <= 0.0) {
      xmin = -1.0;
      xmax = 1.0;
      ymax = 1.0;
    }
    ymax *= 1.05;
    const auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * pw; };
    const auto sy = [&](double y) { return py0 + ph - y / ymax * ph; };

    svg << "<g>\n<text x=\"" << px0 + pw / 2 << "\" y=\"" << oy + 14
        << "\" text-anchor=\"middle\">" << error_axis_names()[axis] << "</text>\n";
    svg << "<rect x=\"" << px0 << "\" y=\"" << py0 << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << px0 << "\" y=\"" << py0 + ph + 14 << "\">" << fmt(std::round(xmin * 100) / 100)
        << "</text>\n<text x=\"" << px0 + pw << "\" y=\"" << py0 + ph + 14
        << "\" text-anchor=\"end\">" << fmt(std::round(xmax * 100) / 100) << "</text>\n";
    if (u > 0.0) {
      svg << "<polyline fill=\"none\" stroke=\"#444\" stroke-dasharray=\"4,3\" points=\""
          << sx(-u) << ',' << sy(0) << ' ' << sx(-u) << ',' << sy(1.0 / (2.0 * u)) << ' ' << sx(u)
          << ',' << sy(1.0 / (2.0 * u)) << ' ' << sx(u) << ',' << sy(0) << "\"/>\n";
    }
    for (std::size_t k = 0; k < curves.size(); ++k) {
      if (curves[k].x.empty()) continue;
      svg << "<polyline fill=\"none\" stroke=\"" << kColors[k % 5] << "\" points=\"";
      for (std::size_t i = 0; i < curves[k].x.size(); ++i) {
        svg << (i ? " " : "") << sx(curves[k].x[i]) << ',' << sy(curves[k].density[i]);
      }
      svg << "\"/>\n";
    }
    svg << "</g>\n";
  }
  for (std::size_t k = 0; k < panels.curve_labels.size(); ++k) {
    const int x = 20 + static_cast<int>(k) * 140;
    svg << "<line x1=\"" << x << "\" y1=\"" << kHeight - 12 << "\" x2=\"" << x + 20 << "\" y2=\""
        << kHeight - 12 << "\" stroke=\"" << kColors[k % 5] << "\"/>\n<text x=\"" << x + 25
        << "\" y=\"" << kHeight - 8 << "\">" << panels.curve_labels[k] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

namespace {

TimingSample aggregate(const std::vector<TimingSample>& samples, bool median) {
  if (samples.empty()) return {};
  std::array<std::vector<double>, 4> cols;
  for (const TimingSample& s : samples) {
    cols[0].push_back(s.z_buffer_ms);
    cols[1].push_back(s.occlusion_ms);
    cols[2].push_back(s.regressor_ms);
    cols[3].push_back(s.total_ms);
  }
  std::array<double, 4> r{};
  for (std::size_t i = 0; i < 4; ++i) {
    const AxisStats a = summarize_values(cols[i]);
    r[i] = median ? a.median : a.mean;
  }
  return {r[0], r[1], r[2], r[3]};
}

}  // namespace

TimingSample TimingBreakdown::mean() const { return aggregate(samples, false); }
TimingSample TimingBreakdown::median() const { return aggregate(samples, true); }

TimingBreakdown run_benchmark(const BenchmarkSteps& steps, const BenchmarkOptions& options) {
  if (options.warmup < 3) throw InvalidArgument("benchmark: at least 3 warmup iterations required");
  if (options.repetitions < 1) throw InvalidArgument("benchmark: repetitions must be >= 1");
  using Clock = std::chrono::steady_clock;
  static_assert(Clock::is_steady);
  const auto ms = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  const auto call = [](const std::function<void()>& f) {
    if (f) f();
  };
  TimingBreakdown out;
  for (int i = 0; i < options.warmup + options.repetitions; ++i) {
    const auto t0 = Clock::now();
    call(steps.z_buffer);
    const auto t1 = Clock::now();
    call(steps.occlusion);
    const auto t2 = Clock::now();
    call(steps.regressor);
    const auto t3 = Clock::now();
    if (i >= options.warmup) out.samples.push_back({ms(t0, t1), ms(t1, t2), ms(t2, t3), ms(t0, t3)});
  }
  return out;
}

std::string timing_to_csv(const TimingBreakdown& t) {
  std::ostringstream out;
  out << "row,z_buffer_ms,occlusion_ms,regressor_ms,total_ms\n";
  const auto row = [&](const char* name, const TimingSample& s) {
    out << name << ',' << fmt(s.z_buffer_ms) << ',' << fmt(s.occlusion_ms) << ','
        << fmt(s.regressor_ms) << ',' << fmt(s.total_ms) << '\n';
  };
  row("mean", t.mean());
  row("median", t.median());
  row("reference_gpu", kReferenceGpuTimings);
  return out.str();
}

std::string timing_to_json(const TimingBreakdown& t) {
  const auto obj = [](const TimingSample& s) {
    return nlohmann::ordered_json{{"z_buffer_ms", s.z_buffer_ms},
                                  {"occlusion_ms", s.occlusion_ms},
                                  {"regressor_ms", s.regressor_ms},
                                  {"total_ms", s.total_ms}};
  };
  nlohmann::ordered_json j;
  j["repetitions"] = t.samples.size();
  j["mean"] = obj(t.mean());
  j["median"] = obj(t.median());
  j["reference_gpu"] = obj(kReferenceGpuTimings);
  return j.dump(2) + "\n";
}

}  // namespace maploc

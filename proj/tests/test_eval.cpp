#include <gtest/gtest.h>

#include <thread>

#include "maploc/error.hpp"
#include "maploc/eval.hpp"
#include "support.hpp"

namespace maploc {
namespace {

using test::kPi;

TEST(Stats, SmallSamples) {
  const std::vector<double> v{3.0, 1.0, 2.0};
  const AxisStats s = summarize_values(v);
  EXPECT_EQ(s.median, 2.0);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  EXPECT_NEAR(s.stddev, std::sqrt(2.0 / 3.0), 1e-15);
  const std::vector<double> one{4.5};
  const AxisStats o = summarize_values(one);
  EXPECT_EQ(o.median, 4.5);
  EXPECT_EQ(o.mean, 4.5);
  EXPECT_EQ(o.stddev, 0.0);
  const std::vector<double> even{4.0, 1.0, 2.0, 3.0};
  EXPECT_EQ(summarize_values(even).median, 2.5);
  EXPECT_THROW(summarize_values(std::vector<double>{}), InvalidArgument);
}

TEST(Stats, UniformMean) {
  std::mt19937_64 rng(80);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(10000);
  for (double& x : v) x = u(rng);
  const AxisStats s = summarize_values(v);
  // sigma of U(-2, 2) is 2 / sqrt(3)
  EXPECT_LT(std::abs(s.mean), 3.0 * (2.0 / std::sqrt(3.0)) / 100.0);
  EXPECT_NEAR(s.stddev, 2.0 / std::sqrt(3.0), 0.03);
}

TEST(Stats, SummaryPerAxisAndCsv) {
  std::vector<PoseError> errs(3);
  for (int k = 0; k < 3; ++k) {
    errs[k].components = {1.0 * k, -1.0, 0.0, 0.01 * k, 0.0, 0.0};
    errs[k].total_angle = 0.02;
  }
  const ErrorSummary s = summarize(errs);
  EXPECT_EQ(s.count, 3u);
  EXPECT_EQ(s.axes[kLongitudinal].median, 1.0);
  EXPECT_EQ(s.axes[kLateral].mean, -1.0);
  EXPECT_NEAR(s.translation_norm.max, std::sqrt(5.0), 1e-12);
  const std::string csv = summary_to_csv(std::span(&s, 1));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "stage,quantity,count,median,mean,std,min,max");
  EXPECT_NE(csv.find("0,roll_deg,3,"), std::string::npos);
  EXPECT_NE(summary_to_json(std::span(&s, 1)).find("longitudinal_m"), std::string::npos);
}

TEST(Kde, SingleSamplePeak) {
  const std::vector<double> v{0.0};
  const KdeCurve c = kde_pdf(v, 0.5, 513);
  const auto peak = std::max_element(c.density.begin(), c.density.end());
  EXPECT_NEAR(c.x[static_cast<std::size_t>(peak - c.density.begin())], 0.0, 1e-12);
  EXPECT_NEAR(*peak, 1.0 / (0.5 * std::sqrt(2.0 * kPi)), 1e-12);
}

TEST(Kde, TwoSamplesSymmetric) {
  const std::vector<double> v{-5.0, 5.0};
  const KdeCurve c = kde_pdf(v, 0.5, 1001);
  const std::size_t n = c.x.size();
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(c.density[i], c.density[n - 1 - i], 1e-12);
  EXPECT_LT(c.density[n / 2], 1e-6);
  EXPECT_NEAR(trapezoid(c.x, c.density), 1.0, 1e-3);
}

TEST(Kde, NormalSamplesApproachDensity) {
  std::mt19937_64 rng(81);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(1000);
  for (double& x : v) x = n(rng);
  const KdeCurve c = kde_pdf(v, 0.2);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    const double truth = std::exp(-0.5 * c.x[i] * c.x[i]) / std::sqrt(2.0 * kPi);
    worst = std::max(worst, std::abs(c.density[i] - truth));
  }
  EXPECT_LT(worst, 0.05);
  EXPECT_NEAR(trapezoid(c.x, c.density), 1.0, 1e-3);
}

TEST(Kde, BandwidthAndSvg) {
  std::mt19937_64 rng(82);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> v(400);
  for (double& x : v) x = n(rng);
  const double h = silverman_bandwidth(v);
  EXPECT_GT(h, 0.3);
  EXPECT_LT(h, 1.0);
  EXPECT_GT(silverman_bandwidth(std::vector<double>{1.0, 1.0}), 0.0);

  KdePanelSet panels;
  panels.curve_labels = {"stage 1"};
  panels.samples.resize(1);
  for (auto& axis : panels.samples[0]) axis = v;
  panels.uniform_half_width = {2, 2, 2, 10, 10, 10};
  const std::string svg = kde_svg(panels);
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("stage 1"), std::string::npos);
}

TEST(Timing, BreakdownShapeAndIdentityRegressor) {
  BenchmarkSteps steps;
  steps.z_buffer = [] { std::this_thread::sleep_for(std::chrono::milliseconds(2)); };
  steps.occlusion = [] {};
  steps.regressor = [] {};
  const TimingBreakdown t = run_benchmark(steps, {3, 5});
  ASSERT_EQ(t.samples.size(), 5u);
  const TimingSample m = t.median();
  EXPECT_GE(m.z_buffer_ms, 2.0);
  EXPECT_LT(m.regressor_ms, 0.5);
  EXPECT_NEAR(m.total_ms, m.z_buffer_ms + m.occlusion_ms + m.regressor_ms, 0.5);
  const std::string csv = timing_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,z_buffer_ms,occlusion_ms,regressor_ms,total_ms");
  EXPECT_NE(csv.find("reference_gpu,8.6,1.4,4.6,14.7"), std::string::npos);
  EXPECT_THROW(run_benchmark(steps, {2, 5}), InvalidArgument);
}

}  // namespace
}  // namespace maploc

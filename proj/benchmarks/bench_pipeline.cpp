#include <benchmark/benchmark.h>

#include "maploc/map_store.hpp"
#include "maploc/occlusion.hpp"
#include "maploc/projection.hpp"
#include "maploc/refine.hpp"
#include "maploc/synthetic.hpp"

namespace {

using namespace maploc;

const PointCloudMap& scene() {
  static const PointCloudMap s = synthetic::street_scene();
  return s;
}

void BM_Project(benchmark::State& state) {
  const CameraModel cam = synthetic::street_camera();
  const PoseSE3 pose = synthetic::street_trajectory(1).front();
  CropSpec crop;
  crop.forward = static_cast<double>(state.range(0));
  const PointCloudMap local = crop_local(scene(), pose, crop);
  for (auto _ : state) benchmark::DoNotOptimize(project(local, pose, cam));
  state.counters["points"] = static_cast<double>(local.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(local.size()));
}
BENCHMARK(BM_Project)->Arg(5)->Arg(10)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMicrosecond);

void BM_ProjectWorkers(benchmark::State& state) {
  const CameraModel cam = synthetic::street_camera();
  const PoseSE3 pose = synthetic::street_trajectory(1).front();
  const ProjectionOptions options{0.05, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(project(scene(), pose, cam, options));
}
BENCHMARK(BM_ProjectWorkers)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_OcclusionFilter(benchmark::State& state) {
  const CameraModel cam = synthetic::street_camera();
  const DepthImage img = project(scene(), synthetic::street_trajectory(1).front(), cam);
  const auto params = OcclusionParams::from_threshold(static_cast<int>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(occlusion_filter(img, params));
}
BENCHMARK(BM_OcclusionFilter)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMicrosecond);

void BM_BruteForceVisibility(benchmark::State& state) {
  const CameraModel cam = synthetic::street_camera();
  const DepthImage img = project(scene(), synthetic::street_trajectory(1).front(), cam);
  const auto params = OcclusionParams::from_threshold(5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_visibility(img, params));
}
BENCHMARK(BM_BruteForceVisibility)->Unit(benchmark::kMillisecond);

void BM_VoxelDownsample(benchmark::State& state) {
  const double resolution = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(voxel_downsample(scene(), resolution));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene().size()));
}
BENCHMARK(BM_VoxelDownsample)->Arg(5)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ScoreDepth(benchmark::State& state) {
  const CameraModel cam = synthetic::street_camera();
  const PoseSE3 pose = synthetic::street_trajectory(1).front();
  const DepthImage a = project(scene(), pose, cam);
  const DepthImage b = fill_depth(a, 2);
  for (auto _ : state) benchmark::DoNotOptimize(score_depth(a, b));
}
BENCHMARK(BM_ScoreDepth)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

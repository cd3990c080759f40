#pragma once

#include <optional>
#include <string>

#include "run_config.hpp"

namespace maploc::cli {

struct RenderArgs {
  std::optional<int> frame;
  std::string pose;  ///< 12 numbers, camera-from-map [R|T]; overrides frame
  std::string name;
  bool pad = false;
};

struct EvalArgs {
  std::string traces;
};

struct BenchArgs {
  int repetitions = 20;
  int warmup = 3;
  bool regressor_given = false;
};

int cmd_build_map(const RunConfig& cfg);
int cmd_render(const RunConfig& cfg, const RenderArgs& args);
int cmd_perturb(const RunConfig& cfg);
int cmd_refine(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg, const EvalArgs& args);
int cmd_bench(const RunConfig& cfg, const BenchArgs& args);

}  // namespace maploc::cli

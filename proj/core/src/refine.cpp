#include "maploc/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "maploc/random.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace maploc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

// ---------------------------------------------------------------------------
// oracle

PoseTarget oracle_correction(const PoseSE3& h_current, const PoseSE3& h_gt, double contraction,
                             const NoiseSpec& residual_noise, std::uint64_t seed) {
  if (!(contraction >= 0.0 && contraction <= 1.0)) {
    throw InvalidArgument("oracle_correction: contraction must lie in [0, 1]");
  }
  residual_noise.validate();
  const bool noisy = residual_noise.max_translation > 0.0 || residual_noise.max_rotation > 0.0;
  if (contraction == 1.0 && !noisy) {
    return {};
  }

  const PoseSE3 e = pose_compose(h_current, pose_inverse(h_gt));
  const Eigen::Matrix3d r_e = e.rotation_matrix();
  const Eigen::Vector3d d = -(r_e.transpose() * e.translation());

  Quat q = e.rotation();
  if (q.a < 0.0) q = -q;
  const Eigen::Vector3d v = q.vec();
  const double s = v.norm();
  Quat q_scaled;
  if (s > 0.0) {
    const double theta = 2.0 * std::atan2(s, q.a);
    q_scaled = quat_from_axis_angle(v / s, contraction * theta);
  }
  const Eigen::Matrix3d r_scaled = quat_to_matrix(q_scaled);
  const PoseSE3 e_scaled(q_scaled, -(r_scaled * (contraction * d)));

  PoseSE3 correction = pose_compose(e_scaled, pose_inverse(e));
  if (noisy) {
    correction = pose_compose(sample_init_pose(PoseSE3::identity(), residual_noise, seed), correction);
  }
  return PoseTarget::from_pose(correction);
}

OracleRegressor::OracleRegressor(const PoseSE3& h_gt, double contraction,
                                 const NoiseSpec& residual_noise, std::uint64_t seed)
    : h_gt_(h_gt), contraction_(contraction), noise_(residual_noise), seed_(seed) {
  if (!(contraction >= 0.0 && contraction <= 1.0)) {
    throw InvalidArgument("OracleRegressor: contraction must lie in [0, 1]");
  }
  noise_.validate();
}

PoseTarget OracleRegressor::predict(const RgbImage&, const DepthImage& lidar_image) {
  return oracle_correction(lidar_image.generating_pose, h_gt_, contraction_, noise_,
                           derive_seed(seed_, calls_++));
}

// ---------------------------------------------------------------------------
// grid search

std::size_t GridSpec::candidate_count() const {
  std::size_t n = 1;
  for (const int s : steps) n *= static_cast<std::size_t>(std::max(s, 0));
  return n;
}

void GridSpec::validate() const {
  for (std::size_t i = 0; i < 6; ++i) {
    if (steps[i] < 1) throw InvalidArgument("GridSpec: every axis needs at least one step");
    if (!(extents[i] >= 0.0) || !std::isfinite(extents[i])) {
      throw InvalidArgument("GridSpec: extents must be finite and non-negative");
    }
  }
  if (!(min_overlap_fraction >= 0.0 && min_overlap_fraction <= 1.0)) {
    throw InvalidArgument("GridSpec: min_overlap_fraction must lie in [0, 1]");
  }
  if (reference_fill < 0) throw InvalidArgument("GridSpec: reference_fill must be >= 0");
  if (!(truncation >= 0.0) || !std::isfinite(truncation)) {
    throw InvalidArgument("GridSpec: truncation must be finite and non-negative");
  }
  if (point_stride < 1) throw InvalidArgument("GridSpec: point_stride must be >= 1");
  if (levels < 1) throw InvalidArgument("GridSpec: levels must be >= 1");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw InvalidArgument("GridSpec: shrink must lie in (0, 1]");
  crop.validate();
}

PoseSE3 GridSpec::candidate(std::size_t index) const {
  std::array<double, 6> value{};
  for (int axis = 5; axis >= 0; --axis) {
    const auto n = static_cast<std::size_t>(steps[static_cast<std::size_t>(axis)]);
    const std::size_t k = index % n;
    index /= n;
    const double ext = extents[static_cast<std::size_t>(axis)];
    value[static_cast<std::size_t>(axis)] =
        n == 1 ? 0.0 : -ext + 2.0 * ext * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return local_perturbation({value[0], value[1], value[2]}, value[3], value[4], value[5]);
}

DepthScore score_depth(const DepthImage& candidate, const DepthImage& reference, double truncation) {
  if (!(truncation >= 0.0)) throw InvalidArgument("score_depth: truncation must be >= 0");
  const double cap = truncation > 0.0 ? truncation : std::numeric_limits<double>::infinity();
  if (candidate.width != reference.width || candidate.height != reference.height) {
    throw InvalidArgument("score_depth: image sizes differ");
  }
  double sum = 0.0;
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < candidate.depth.size(); ++i) {
    const float a = candidate.depth[i];
    const float b = reference.depth[i];
    if (a == 0.0f || b == 0.0f) continue;
    sum += std::min(std::abs(static_cast<double>(a) - static_cast<double>(b)), cap);
    ++overlap;
  }
  return {overlap > 0 ? sum / static_cast<double>(overlap) : 0.0, overlap};
}

DepthImage fill_depth(const DepthImage& img, int radius) {
  if (radius < 0) throw InvalidArgument("fill_depth: radius must be >= 0");
  DepthImage out = img;
  if (radius == 0) return out;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (img.at(u, v) != 0.0f) continue;
      float best = 0.0f;
      for (int dv = -radius; dv <= radius; ++dv) {
        for (int du = -radius; du <= radius; ++du) {
          if (!img.in_bounds(u + du, v + dv)) continue;
          const float d = img.at(u + du, v + dv);
          if (d != 0.0f && (best == 0.0f || d < best)) best = d;
        }
      }
      out.at(u, v) = best;
    }
  }
  return out;
}

namespace {

struct Ranked {
  double score = std::numeric_limits<double>::infinity();
  double magnitude = 0.0;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  bool valid() const { return index != std::numeric_limits<std::size_t>::max(); }
  bool operator<(const Ranked& o) const {
    if (score != o.score) return score < o.score;
    if (magnitude != o.magnitude) return magnitude < o.magnitude;
    return index < o.index;
  }
};

double correction_magnitude(const PoseSE3& g) {
  const double angle = rotation_angle(g.rotation());
  // camera-centre offset, so the magnitude does not depend on the rotation
  const Eigen::Vector3d d = g.rotation_matrix().transpose() * g.translation();
  return std::sqrt(d.squaredNorm() + angle * angle);
}

/// Points of `map` in the frame of `h` that some candidate within the grid's
/// reach could see: the view frustum is widened by the summed rotation reach
/// and then grown by the translation reach.
PointCloudMap local_cloud(const PointCloudMap& map, const PoseSE3& h, const CameraModel& cam,
                          const GridSpec& grid) {
  double reach = 0.0;
  double turn = 0.0;
  double factor = 1.0;
  for (int level = 0; level < grid.levels; ++level) {
    reach += factor * std::sqrt(grid.extents[0] * grid.extents[0] + grid.extents[1] * grid.extents[1] +
                                grid.extents[2] * grid.extents[2]);
    turn += factor * (grid.extents[3] + grid.extents[4] + grid.extents[5]);
    factor *= grid.shrink;
  }
  // half-angles of the four frustum sides: left, right, up, down
  const double half[4] = {std::atan((cam.cx() + 0.5) / cam.fx()),
                          std::atan((cam.width - cam.cx() + 0.5) / cam.fx()),
                          std::atan((cam.cy() + 0.5) / cam.fy()),
                          std::atan((cam.height - cam.cy() + 0.5) / cam.fy())};
  double tan_side[4], cos_side[4];
  bool cull = true;
  for (int i = 0; i < 4; ++i) {
    const double angle = half[i] + turn;
    if (angle >= 0.5 * std::numbers::pi - 1e-3) cull = false;
    tan_side[i] = std::tan(angle);
    cos_side[i] = std::cos(angle);
  }

  const Eigen::Matrix3d r = h.rotation_matrix();
  const Eigen::Vector3d& t = h.translation();
  const auto stride = static_cast<std::size_t>(grid.point_stride);
  PointCloudMap out;
  out.reserve(map.size() / stride + 1, false);
  for (std::size_t i = 0; i < map.size(); i += stride) {
    const Eigen::Vector3f& p = map.points[i];
    const Eigen::Vector3d c = transform_point(r, t, p.x(), p.y(), p.z());
    if (!(c.z() > -reach && c.z() <= grid.crop.forward + reach &&
          std::abs(c.x()) <= grid.crop.lateral + reach && std::abs(c.y()) <= grid.crop.vertical + reach)) {
      continue;
    }
    if (cull && ((-c.x() - c.z() * tan_side[0]) * cos_side[0] > reach ||
                 (c.x() - c.z() * tan_side[1]) * cos_side[1] > reach ||
                 (-c.y() - c.z() * tan_side[2]) * cos_side[2] > reach ||
                 (c.y() - c.z() * tan_side[3]) * cos_side[3] > reach)) {
      continue;
    }
    out.push_back(c.cast<float>());
  }
  return out;
}

/// z-buffer render of one candidate followed by score_depth, without building
/// a DepthImage. `zbuf` is scratch space of width * height floats.
DepthScore score_candidate(const PointCloudMap& local, const PoseSE3& g, const CameraModel& cam,
                           double z_near, double cap, const DepthImage& reference, std::vector<float>& zbuf) {
  const Eigen::Matrix<double, 3, 4> a = cam.projection * g.matrix();
  const Eigen::Matrix3d r = g.rotation_matrix();
  const Eigen::Vector3d& t = g.translation();
  const int w = cam.width, h = cam.height;
  const double w_lim = w - 0.5, h_lim = h - 0.5;
  std::fill(zbuf.begin(), zbuf.end(), std::numeric_limits<float>::infinity());
  for (const Eigen::Vector3f& pf : local.points) {
    const double x = pf.x(), y = pf.y(), z = pf.z();
    const double zc = r(2, 0) * x + r(2, 1) * y + r(2, 2) * z + t.z();
    if (!(zc > z_near)) continue;
    const double wp = a(2, 0) * x + a(2, 1) * y + a(2, 2) * z + a(2, 3);
    if (!(wp > 0.0)) continue;
    const double inv = 1.0 / wp;
    const double u = (a(0, 0) * x + a(0, 1) * y + a(0, 2) * z + a(0, 3)) * inv;
    const double v = (a(1, 0) * x + a(1, 1) * y + a(1, 2) * z + a(1, 3)) * inv;
    if (!(u >= -0.5 && u < w_lim && v >= -0.5 && v < h_lim)) continue;
    float& cell = zbuf[static_cast<std::size_t>(std::floor(v + 0.5)) * w +
                       static_cast<std::size_t>(std::floor(u + 0.5))];
    cell = std::min(cell, static_cast<float>(zc));
  }
  double sum = 0.0;
  std::size_t overlap = 0;
  for (int vi = 0; vi < h; ++vi) {
    const float* row = zbuf.data() + static_cast<std::size_t>(vi) * w;
    const float* ref = reference.depth.data() + static_cast<std::size_t>(vi) * reference.width;
    for (int ui = 0; ui < w; ++ui) {
      if (row[ui] == std::numeric_limits<float>::infinity() || ref[ui] == 0.0f) continue;
      sum += std::min(std::abs(static_cast<double>(row[ui]) - static_cast<double>(ref[ui])), cap);
      ++overlap;
    }
  }
  return {overlap > 0 ? sum / static_cast<double>(overlap) : 0.0, overlap};
}

}  // namespace

PoseTarget grid_search_correction(const DepthImage& reference, const PointCloudMap& map,
                                  const CameraModel& cam, const PoseSE3& h_current,
                                  const GridSpec& grid) {
  grid.validate();
  const DepthImage filled = fill_depth(reference, grid.reference_fill);
  const PointCloudMap local = local_cloud(map, h_current, cam, grid);
  const std::size_t count = grid.candidate_count();
  const double cap = grid.truncation > 0.0 ? grid.truncation : std::numeric_limits<double>::infinity();

  if (reference.width < cam.width || reference.height < cam.height) {
    throw InvalidArgument("grid search: reference image is smaller than the camera image");
  }

  PoseSE3 total = PoseSE3::identity();
  GridSpec level_grid = grid;
  std::vector<Ranked> ranked(count);
  std::vector<std::size_t> overlap(count);
  for (int level = 0; level < grid.levels; ++level) {
    detail::parallel_chunks(count, std::max(1, grid.projection.workers),
                            [&](std::size_t begin, std::size_t end, int) {
      std::vector<float> zbuf(static_cast<std::size_t>(cam.width) * cam.height);
      for (std::size_t i = begin; i < end; ++i) {
        const PoseSE3 g = pose_compose(level_grid.candidate(i), total);
        const DepthScore s = score_candidate(local, g, cam, grid.projection.z_near, cap, filled, zbuf);
        ranked[i] = {s.mean_abs_diff, correction_magnitude(g), i};
        overlap[i] = s.overlap;
      }
    });
    const std::size_t largest = *std::max_element(overlap.begin(), overlap.end());
    const auto needed = std::max(grid.min_overlap,
        static_cast<std::size_t>(std::ceil(grid.min_overlap_fraction * static_cast<double>(largest))));
    Ranked winner;
    for (std::size_t i = 0; i < count; ++i) {
      if (overlap[i] >= needed && ranked[i] < winner) winner = ranked[i];
    }
    if (!winner.valid()) {
      if (level == 0) {
        throw InsufficientOverlap("grid search: no candidate overlaps the reference by at least " +
                                  std::to_string(grid.min_overlap) + " pixels");
      }
      break;
    }
    total = pose_compose(level_grid.candidate(winner.index), total);
    for (double& e : level_grid.extents) e *= grid.shrink;
  }
  return PoseTarget::from_pose(total);
}

GridSearchRegressor::GridSearchRegressor(DepthImage reference,
                                         std::shared_ptr<const PointCloudMap> map, CameraModel cam,
                                         GridSpec grid)
    : reference_(std::move(reference)), map_(std::move(map)), cam_(std::move(cam)), grid_(grid) {
  if (!map_) throw InvalidArgument("GridSearchRegressor: map is null");
  grid_.validate();
}

PoseTarget GridSearchRegressor::predict(const RgbImage&, const DepthImage& lidar_image) {
  return grid_search_correction(reference_, *map_, cam_, lidar_image.generating_pose, grid_);
}

// ---------------------------------------------------------------------------
// schedule and refinement loop

std::vector<StageSpec> default_schedule(const std::string& regressor_id) {
  return {{regressor_id, 2.0, 10.0}, {regressor_id, 1.0, 2.0}, {regressor_id, 0.6, 2.0}};
}

void validate_schedule(std::span<const StageSpec> stages) {
  if (stages.empty()) throw InvalidArgument("schedule: at least one stage is required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageSpec& s = stages[i];
    const std::string where = "schedule: stage " + std::to_string(i + 1);
    if (s.regressor_id.empty()) throw InvalidArgument(where + " has no regressor");
    if (!(s.max_translation > 0.0) || !(s.max_rotation_deg > 0.0)) {
      throw InvalidArgument(where + " needs positive ranges");
    }
    if (i > 0 && s.max_translation > stages[i - 1].max_translation) {
      throw InvalidArgument(where + " has a larger translation range than its predecessor");
    }
  }
}

DepthImage render_lidar_image(const PointCloudMap& map, const PoseSE3& pose, const CameraModel& cam,
                              const CropSpec& crop, const std::optional<OcclusionParams>& occlusion,
                              const ProjectionOptions& projection, StageTimings* timings) {
  auto start = Clock::now();
  const PointCloudMap local = crop_local(map, pose, crop);
  DepthImage img = project(local, pose, cam, projection);
  if (timings) timings->render_ms = elapsed_ms(start);
  if (occlusion) {
    start = Clock::now();
    img = occlusion_filter(img, *occlusion, projection.workers);
    if (timings) timings->occlusion_ms = elapsed_ms(start);
  }
  return img;
}

namespace {

bool exceeds_range(const PoseError& e, const StageSpec& stage) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(e.components[i]) > stage.max_translation) return true;
  }
  for (std::size_t i = 3; i < 6; ++i) {
    if (std::abs(e.components[i]) > stage.max_rotation_deg * kDeg) return true;
  }
  return false;
}

}  // namespace

RefineResult refine(const PoseSE3& h_init, const RgbImage& frame, const PointCloudMap& map,
                    const CameraModel& cam, std::span<const StageSpec> stages,
                    const RegressorSet& regressors, const RefineOptions& options) {
  validate_schedule(stages);
  options.crop.validate();
  for (const StageSpec& s : stages) {
    const auto it = regressors.find(s.regressor_id);
    if (it == regressors.end() || !it->second) {
      throw InvalidArgument("refine: no regressor bound to '" + s.regressor_id + "'");
    }
  }
  const std::optional<OcclusionParams> occlusion =
      options.apply_occlusion ? std::optional<OcclusionParams>(options.occlusion) : std::nullopt;

  RefineResult result;
  result.pose = h_init;
  TraceEntry initial;
  initial.pose = h_init;
  if (options.ground_truth) initial.error = pose_error(*options.ground_truth, h_init);
  result.trace.push_back(initial);

  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageSpec& stage = stages[i];
    TraceEntry entry;
    entry.stage = static_cast<int>(i + 1);
    entry.regressor_id = stage.regressor_id;
    entry.render_pose = result.pose;
    if (const auto& prev = result.trace.back().error) {
      entry.out_of_range = exceeds_range(*prev, stage);
    }
    const DepthImage lidar = render_lidar_image(map, result.pose, cam, options.crop, occlusion,
                                                options.projection, &entry.timings);
    PoseSE3 correction;
    try {
      const auto start = Clock::now();
      const PoseTarget out = regressors.at(stage.regressor_id)->predict(frame, lidar);
      entry.timings.regressor_ms = elapsed_ms(start);
      correction = out.to_pose();
    } catch (const std::exception& ex) {
      result.failure = "stage " + std::to_string(i + 1) + ": " + ex.what();
      return result;
    }
    result.pose = pose_compose(correction, result.pose);
    entry.pose = result.pose;
    if (options.ground_truth) entry.error = pose_error(*options.ground_truth, result.pose);
    result.trace.push_back(entry);
  }
  return result;
}

// ---------------------------------------------------------------------------
// trace export

namespace {

constexpr const char* kTraceColumns =
    "frame,stage,regressor,longitudinal_m,lateral_m,vertical_m,roll_deg,pitch_deg,yaw_deg,"
    "total_angle_deg,translation_m,out_of_range";
constexpr const char* kTimingColumns = ",render_ms,occlusion_ms,regressor_ms";

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

std::string traces_to_csv(std::span<const FrameTrace> traces, bool include_timings) {
  std::ostringstream out;
  out << kTraceColumns << (include_timings ? kTimingColumns : "") << '\n';
  for (const FrameTrace& ft : traces) {
    for (const TraceEntry& e : ft.trace) {
      out << ft.frame << ',' << e.stage << ',' << e.regressor_id;
      if (e.error) {
        for (std::size_t i = 0; i < 6; ++i) {
          out << ',' << fmt(i < 3 ? e.error->components[i] : e.error->components[i] / kDeg);
        }
        out << ',' << fmt(e.error->total_angle / kDeg) << ',' << fmt(e.error->translation_norm());
      } else {
        out << ",,,,,,,,";
      }
      out << ',' << (e.out_of_range ? 1 : 0);
      if (include_timings) {
        out << ',' << fmt(e.timings.render_ms) << ',' << fmt(e.timings.occlusion_ms) << ','
            << fmt(e.timings.regressor_ms);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string traces_to_json(std::span<const FrameTrace> traces, bool include_timings) {
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (const FrameTrace& ft : traces) {
    nlohmann::ordered_json f;
    f["frame"] = ft.frame;
    f["failure"] = ft.failure ? nlohmann::ordered_json(*ft.failure) : nlohmann::ordered_json();
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const TraceEntry& e : ft.trace) {
      nlohmann::ordered_json s;
      s["stage"] = e.stage;
      s["regressor"] = e.regressor_id;
      s["pose"] = format_pose(e.pose);
      s["render_pose"] = e.render_pose ? nlohmann::ordered_json(format_pose(*e.render_pose))
                                       : nlohmann::ordered_json();
      if (e.error) {
        nlohmann::ordered_json err;
        err["longitudinal_m"] = e.error->components[kLongitudinal];
        err["lateral_m"] = e.error->components[kLateral];
        err["vertical_m"] = e.error->components[kVertical];
        err["roll_deg"] = e.error->components[kRoll] / kDeg;
        err["pitch_deg"] = e.error->components[kPitch] / kDeg;
        err["yaw_deg"] = e.error->components[kYaw] / kDeg;
        err["total_angle_deg"] = e.error->total_angle / kDeg;
        err["translation_m"] = e.error->translation_norm();
        s["error"] = err;
      } else {
        s["error"] = nullptr;
      }
      s["out_of_range"] = e.out_of_range;
      if (include_timings) {
        s["timings_ms"] = {{"render", e.timings.render_ms},
                           {"occlusion", e.timings.occlusion_ms},
                           {"regressor", e.timings.regressor_ms}};
      }
      stages.push_back(s);
    }
    f["stages"] = stages;
    frames.push_back(f);
  }
  return frames.dump(2) + "\n";
}

std::vector<TraceRow> read_traces_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines[0]).substr(0, 5) != "frame") {
    throw FormatError("trace CSV: missing header", 0);
  }
  const bool timings = detail::trim(lines[0]).find("render_ms") != std::string_view::npos;
  std::vector<TraceRow> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::size_t expected = timings ? 15 : 12;
    if (cells.size() != expected) {
      throw FormatError("trace CSV: expected " + std::to_string(expected) + " columns", ln + 1);
    }
    if (cells[3].empty()) continue;
    TraceRow row;
    row.frame = static_cast<int>(detail::parse_double(cells[0], ln + 1));
    row.stage = static_cast<int>(detail::parse_double(cells[1], ln + 1));
    row.regressor_id = std::string(cells[2]);
    for (std::size_t i = 0; i < 6; ++i) {
      const double v = detail::parse_double(cells[3 + i], ln + 1);
      row.error.components[i] = i < 3 ? v : v * kDeg;
    }
    row.error.total_angle = detail::parse_double(cells[9], ln + 1) * kDeg;
    row.out_of_range = cells[11] == "1";
    if (timings) {
      row.timings.render_ms = detail::parse_double(cells[12], ln + 1);
      row.timings.occlusion_ms = detail::parse_double(cells[13], ln + 1);
      row.timings.regressor_ms = detail::parse_double(cells[14], ln + 1);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace maploc

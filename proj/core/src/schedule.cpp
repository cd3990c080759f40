#include "maploc/schedule.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "maploc/file_io.hpp"
#include "maploc/random.hpp"
#include "maploc/spool.hpp"
#include "text_util.hpp"

namespace maploc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double to_double(const std::string& key, std::string_view s) {
  s = detail::trim(s);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config: expected 'key = value'", i + 1);
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw FormatError("config: empty key", i + 1);
    if (!cfg.entries_.emplace(key, value).second) {
      throw ConfigError(key, "duplicate key on line " + std::to_string(i + 1));
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(read_file_text(path));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? to_double(key, *v) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (v->empty() || res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(key, "expected an integer, got '" + *v + "'");
  }
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  const auto v = get(key);
  if (!v) return {};
  std::vector<double> out;
  std::string_view s = *v;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(to_double(key, s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::string KeyValueConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

GridSpec default_grid() {
  GridSpec g;
  g.steps = {3, 3, 3, 3, 3, 3};
  g.extents = {1.0, 1.0, 1.0, 5.0 * kDeg, 5.0 * kDeg, 5.0 * kDeg};
  g.levels = 6;
  g.shrink = 0.5;
  return g;
}

namespace {

RegressorKind kind_from_name(const std::string& key, const std::string& name) {
  if (name == "identity") return RegressorKind::kIdentity;
  if (name == "oracle") return RegressorKind::kOracle;
  if (name == "grid") return RegressorKind::kGridSearch;
  if (name == "external") return RegressorKind::kExternal;
  throw ConfigError(key, "unknown regressor type '" + name + "'");
}

RegressorBinding predeclared(const std::string& id, RegressorKind kind) {
  RegressorBinding b;
  b.id = id;
  b.kind = kind;
  b.grid = default_grid();
  return b;
}

}  // namespace

RegressorBindings bindings_from_config(const KeyValueConfig& cfg) {
  RegressorBindings out;
  out["identity"] = predeclared("identity", RegressorKind::kIdentity);
  out["oracle"] = predeclared("oracle", RegressorKind::kOracle);
  out["grid"] = predeclared("grid", RegressorKind::kGridSearch);
  out["external"] = predeclared("external", RegressorKind::kExternal);

  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("regressor.", 0) != 0) continue;
    const auto dot = key.rfind('.');
    if (dot <= 10) throw ConfigError(key, "expected regressor.<id>.<field>");
    const std::string id = key.substr(10, dot - 10);
    if (out.count(id) == 0) {
      const std::string type_key = "regressor." + id + ".type";
      const auto type = cfg.get(type_key);
      if (!type) throw ConfigError(type_key, "missing");
      out[id] = predeclared(id, kind_from_name(type_key, *type));
    }
  }

  for (auto& [id, b] : out) {
    const std::string p = "regressor." + id + ".";
    if (const auto type = cfg.get(p + "type")) b.kind = kind_from_name(p + "type", *type);
    b.contraction = cfg.get_double(p + "contraction", b.contraction);
    if (!(b.contraction >= 0.0 && b.contraction <= 1.0)) {
      throw ConfigError(p + "contraction", "must lie in [0, 1]");
    }
    b.residual_noise.max_translation = cfg.get_double(p + "noise_t", 0.0);
    b.residual_noise.max_rotation = cfg.get_double(p + "noise_r", 0.0) * kDeg;
    if (b.residual_noise.max_translation < 0.0) throw ConfigError(p + "noise_t", "must be >= 0");
    if (b.residual_noise.max_rotation < 0.0) throw ConfigError(p + "noise_r", "must be >= 0");

    if (cfg.has(p + "steps")) {
      const auto steps = cfg.get_doubles(p + "steps");
      if (steps.size() != 6) throw ConfigError(p + "steps", "expected 6 comma-separated counts");
      for (std::size_t i = 0; i < 6; ++i) {
        if (steps[i] < 1 || steps[i] != std::floor(steps[i])) {
          throw ConfigError(p + "steps", "counts must be positive integers");
        }
        b.grid.steps[i] = static_cast<int>(steps[i]);
      }
    }
    if (cfg.has(p + "extents")) {
      const auto ext = cfg.get_doubles(p + "extents");
      if (ext.size() != 6) throw ConfigError(p + "extents", "expected 6 comma-separated values");
      for (std::size_t i = 0; i < 6; ++i) {
        if (ext[i] < 0.0) throw ConfigError(p + "extents", "values must be >= 0");
        b.grid.extents[i] = i < 3 ? ext[i] : ext[i] * kDeg;
      }
    }
    b.grid.levels = static_cast<int>(cfg.get_int(p + "levels", b.grid.levels));
    if (b.grid.levels < 1) throw ConfigError(p + "levels", "must be >= 1");
    b.grid.shrink = cfg.get_double(p + "shrink", b.grid.shrink);
    if (!(b.grid.shrink > 0.0 && b.grid.shrink <= 1.0)) {
      throw ConfigError(p + "shrink", "must lie in (0, 1]");
    }
    const auto overlap = cfg.get_int(p + "min_overlap", static_cast<std::int64_t>(b.grid.min_overlap));
    if (overlap < 1) throw ConfigError(p + "min_overlap", "must be >= 1");
    b.grid.min_overlap = static_cast<std::size_t>(overlap);
    b.grid.point_stride = static_cast<int>(cfg.get_int(p + "point_stride", b.grid.point_stride));
    if (b.grid.point_stride < 1) throw ConfigError(p + "point_stride", "must be >= 1");
    b.grid.truncation = cfg.get_double(p + "truncation", b.grid.truncation);
    if (!(b.grid.truncation >= 0.0) || !std::isfinite(b.grid.truncation)) {
      throw ConfigError(p + "truncation", "must be finite and >= 0");
    }
    b.spool_dir = cfg.get_string(p + "spool", b.spool_dir.string());
    const auto timeout = cfg.get_int(p + "timeout_ms", b.timeout.count());
    if (timeout < 1) throw ConfigError(p + "timeout_ms", "must be >= 1");
    b.timeout = std::chrono::milliseconds(timeout);
  }
  return out;
}

std::vector<StageSpec> schedule_from_config(const KeyValueConfig& cfg,
                                            const std::string& regressor_id) {
  if (!cfg.has("stages")) return default_schedule(regressor_id);
  const auto n = cfg.get_int("stages", 0);
  if (n < 1) throw ConfigError("stages", "must be >= 1");
  std::vector<StageSpec> stages;
  for (std::int64_t i = 1; i <= n; ++i) {
    const std::string p = "stage." + std::to_string(i) + ".";
    StageSpec s;
    s.regressor_id = cfg.get_string(p + "regressor", regressor_id);
    if (!cfg.has(p + "max_translation")) throw ConfigError(p + "max_translation", "missing");
    if (!cfg.has(p + "max_rotation")) throw ConfigError(p + "max_rotation", "missing");
    s.max_translation = cfg.get_double(p + "max_translation", 0.0);
    s.max_rotation_deg = cfg.get_double(p + "max_rotation", 0.0);
    if (!(s.max_translation > 0.0)) throw ConfigError(p + "max_translation", "must be > 0");
    if (!(s.max_rotation_deg > 0.0)) throw ConfigError(p + "max_rotation", "must be > 0");
    if (!stages.empty() && s.max_translation > stages.back().max_translation) {
      throw ConfigError(p + "max_translation", "exceeds the previous stage's range");
    }
    stages.push_back(s);
  }
  return stages;
}

RegressorSet make_regressors(const RegressorBindings& bindings, std::span<const StageSpec> stages,
                             const FrameContext& ctx) {
  RegressorSet out;
  std::uint64_t stream = 0;
  for (const StageSpec& stage : stages) {
    ++stream;
    if (out.count(stage.regressor_id) != 0) continue;
    const auto it = bindings.find(stage.regressor_id);
    if (it == bindings.end()) {
      throw ConfigError("stage.regressor", "unknown regressor id '" + stage.regressor_id + "'");
    }
    const RegressorBinding& b = it->second;
    const std::string key = "regressor." + b.id + ".type";
    switch (b.kind) {
      case RegressorKind::kIdentity:
        out[b.id] = std::make_shared<IdentityRegressor>();
        break;
      case RegressorKind::kOracle:
        if (!ctx.ground_truth) throw ConfigError(key, "oracle regressor needs ground-truth poses");
        out[b.id] = std::make_shared<OracleRegressor>(*ctx.ground_truth, b.contraction,
                                                      b.residual_noise,
                                                      derive_seed(ctx.seed, stream));
        break;
      case RegressorKind::kGridSearch: {
        if (!ctx.ground_truth) throw ConfigError(key, "grid regressor needs ground-truth poses");
        if (!ctx.map) throw ConfigError(key, "grid regressor needs a map");
        DepthImage reference =
            render_lidar_image(*ctx.map, *ctx.ground_truth, ctx.camera, b.grid.crop, std::nullopt,
                               b.grid.projection);
        out[b.id] = std::make_shared<GridSearchRegressor>(std::move(reference), ctx.map, ctx.camera,
                                                          b.grid);
        break;
      }
      case RegressorKind::kExternal:
        out[b.id] = std::make_shared<ExternalRegressor>(
            b.spool_dir, "f" + std::to_string(ctx.frame) + "-" + b.id, b.timeout);
        break;
    }
  }
  return out;
}

}  // namespace maploc

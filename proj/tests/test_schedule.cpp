#include <gtest/gtest.h>

#include "maploc/error.hpp"
#include "maploc/schedule.hpp"
#include "maploc/synthetic.hpp"
#include "support.hpp"

namespace maploc {
namespace {

std::string config_error_key(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

TEST(KeyValue, ParseCommentsAndCanonicalText) {
  const auto cfg = KeyValueConfig::parse("# header\n\nb = 2 # trailing\n a=x y \nc = 1, 2.5,3\n");
  EXPECT_EQ(cfg.get_int("b", 0), 2);
  EXPECT_EQ(*cfg.get("a"), "x y");
  EXPECT_EQ(cfg.get_doubles("c"), (std::vector<double>{1.0, 2.5, 3.0}));
  EXPECT_EQ(cfg.get_double("missing", 7.5), 7.5);
  EXPECT_EQ(cfg.to_text(), "a = x y\nb = 2\nc = 1, 2.5,3\n");
  EXPECT_EQ(KeyValueConfig::parse(cfg.to_text()).entries(), cfg.entries());
}

TEST(KeyValue, Errors) {
  try {
    KeyValueConfig::parse("a = 1\nnot a pair\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  EXPECT_THROW(KeyValueConfig::parse(" = 3\n"), FormatError);
  EXPECT_EQ(config_error_key([] { KeyValueConfig::parse("a = 1\na = 2\n"); }), "a");
  const auto cfg = KeyValueConfig::parse("n = 1.5\nw = word\n");
  EXPECT_EQ(config_error_key([&] { cfg.get_int("n", 0); }), "n");
  EXPECT_EQ(config_error_key([&] { cfg.get_double("w", 0); }), "w");
}

TEST(Bindings, PredeclaredAndCustom) {
  const auto cfg = KeyValueConfig::parse(
      "regressor.half.type = oracle\n"
      "regressor.half.contraction = 0.25\n"
      "regressor.half.noise_r = 2\n"
      "regressor.fine.type = grid\n"
      "regressor.fine.steps = 3,3,3,1,1,1\n"
      "regressor.fine.extents = 0.5,0.5,0.5,0,0,0\n"
      "regressor.fine.levels = 4\n"
      "regressor.fine.point_stride = 2\n"
      "regressor.fine.truncation = 1.5\n"
      "regressor.oracle.contraction = 0\n");
  const RegressorBindings b = bindings_from_config(cfg);
  for (const char* id : {"identity", "oracle", "grid", "external"}) EXPECT_TRUE(b.count(id)) << id;
  EXPECT_EQ(b.at("oracle").contraction, 0.0);
  EXPECT_EQ(b.at("half").kind, RegressorKind::kOracle);
  EXPECT_EQ(b.at("half").contraction, 0.25);
  EXPECT_NEAR(b.at("half").residual_noise.max_rotation, 2.0 * test::kDeg, 1e-15);
  const GridSpec& g = b.at("fine").grid;
  EXPECT_EQ(b.at("fine").kind, RegressorKind::kGridSearch);
  EXPECT_EQ(g.steps, (std::array<int, 6>{3, 3, 3, 1, 1, 1}));
  EXPECT_EQ(g.extents[0], 0.5);
  EXPECT_EQ(g.levels, 4);
  EXPECT_EQ(g.point_stride, 2);
  EXPECT_EQ(g.truncation, 1.5);
  EXPECT_EQ(b.at("grid").grid.truncation, 0.0);
  EXPECT_EQ(b.at("grid").grid.steps, default_grid().steps);
}

TEST(Bindings, ValidationNamesTheKey) {
  const auto key_for = [](const std::string& text) {
    return config_error_key([&] { bindings_from_config(KeyValueConfig::parse(text)); });
  };
  EXPECT_EQ(key_for("regressor.x.contraction = 0.5\n"), "regressor.x.type");
  EXPECT_EQ(key_for("regressor.x.type = magic\n"), "regressor.x.type");
  EXPECT_EQ(key_for("regressor.oracle.contraction = 1.5\n"), "regressor.oracle.contraction");
  EXPECT_EQ(key_for("regressor.grid.steps = 3,3,3\n"), "regressor.grid.steps");
  EXPECT_EQ(key_for("regressor.grid.steps = 3,3,3,3,3,0\n"), "regressor.grid.steps");
  EXPECT_EQ(key_for("regressor.grid.extents = 1,1,1,1,1,-1\n"), "regressor.grid.extents");
  EXPECT_EQ(key_for("regressor.grid.levels = 0\n"), "regressor.grid.levels");
  EXPECT_EQ(key_for("regressor.grid.shrink = 0\n"), "regressor.grid.shrink");
  EXPECT_EQ(key_for("regressor.grid.point_stride = 0\n"), "regressor.grid.point_stride");
  EXPECT_EQ(key_for("regressor.grid.truncation = -2\n"), "regressor.grid.truncation");
  EXPECT_EQ(key_for("regressor.external.timeout_ms = 0\n"), "regressor.external.timeout_ms");
}

TEST(Schedule, DefaultAndExplicit) {
  const auto def = schedule_from_config(KeyValueConfig{}, "oracle");
  ASSERT_EQ(def.size(), 3u);
  EXPECT_EQ(def[0].regressor_id, "oracle");
  EXPECT_EQ(def[0].max_translation, 2.0);
  EXPECT_EQ(def[0].max_rotation_deg, 10.0);
  EXPECT_EQ(def[2].max_translation, 0.6);

  const auto cfg = KeyValueConfig::parse(
      "stages = 2\n"
      "stage.1.max_translation = 1.5\nstage.1.max_rotation = 5\n"
      "stage.2.regressor = identity\nstage.2.max_translation = 0.5\nstage.2.max_rotation = 1\n");
  const auto s = schedule_from_config(cfg, "grid");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].regressor_id, "grid");
  EXPECT_EQ(s[1].regressor_id, "identity");
  EXPECT_EQ(s[1].max_rotation_deg, 1.0);
}

TEST(Schedule, ValidationNamesTheKey) {
  const auto key_for = [](const std::string& text) {
    return config_error_key([&] { schedule_from_config(KeyValueConfig::parse(text), "identity"); });
  };
  EXPECT_EQ(key_for("stages = 0\n"), "stages");
  EXPECT_EQ(key_for("stages = 1\nstage.1.max_rotation = 1\n"), "stage.1.max_translation");
  EXPECT_EQ(key_for("stages = 1\nstage.1.max_translation = 1\n"), "stage.1.max_rotation");
  EXPECT_EQ(key_for("stages = 1\nstage.1.max_translation = -1\nstage.1.max_rotation = 1\n"),
            "stage.1.max_translation");
  EXPECT_EQ(key_for("stages = 2\nstage.1.max_translation = 1\nstage.1.max_rotation = 1\n"
                    "stage.2.max_translation = 2\nstage.2.max_rotation = 1\n"),
            "stage.2.max_translation");
}

TEST(MakeRegressors, InstantiatesReferencedBindings) {
  const auto bindings = bindings_from_config(KeyValueConfig{});
  const std::vector<StageSpec> stages{{"identity", 2.0, 10.0}, {"oracle", 1.0, 2.0}};
  FrameContext ctx;
  ctx.camera = synthetic::street_camera();
  EXPECT_EQ(config_error_key([&] { make_regressors(bindings, stages, ctx); }), "regressor.oracle.type");
  ctx.ground_truth = PoseSE3::identity();
  const RegressorSet set = make_regressors(bindings, stages, ctx);
  EXPECT_EQ(set.size(), 2u);
  EXPECT_TRUE(set.count("identity") && set.count("oracle"));
  const std::vector<StageSpec> unknown{{"nope", 1.0, 1.0}};
  EXPECT_EQ(config_error_key([&] { make_regressors(bindings, unknown, ctx); }), "stage.regressor");
  const std::vector<StageSpec> grid{{"grid", 1.0, 1.0}};
  EXPECT_EQ(config_error_key([&] { make_regressors(bindings, grid, ctx); }), "regressor.grid.type");
}

}  // namespace
}  // namespace maploc

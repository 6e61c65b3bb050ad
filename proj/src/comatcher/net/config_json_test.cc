#include <gtest/gtest.h>

#include "comatcher/core/error.h"
#include "comatcher/features/synthetic_scene.h"
#include "comatcher/net/net_config.h"

namespace comatcher {
namespace {

std::string CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

TEST(NetConfigJson, Roundtrip) {
  NetConfig c;
  c.dim = 32;
  c.layers = 3;
  c.position_scale = PositionScale::kPixels;
  const NetConfig back = NetConfigFromJson(NetConfigToJson(c));
  EXPECT_EQ(back.dim, 32);
  EXPECT_EQ(back.layers, 3);
  EXPECT_EQ(back.position_scale, PositionScale::kPixels);
  EXPECT_EQ(back.Thetas(), c.Thetas());
  EXPECT_EQ(NetConfigToJson(back), NetConfigToJson(c));
}

TEST(NetConfigJson, MissingKeysKeepBase) {
  NetConfig base;
  base.heads = 2;
  const NetConfig c = NetConfigFromJson({{"dim", 16}}, base);
  EXPECT_EQ(c.dim, 16);
  EXPECT_EQ(c.heads, 2);
}

TEST(NetConfigJson, RejectsUnknownAndMistypedKeys) {
  EXPECT_EQ(CodeOf([] { NetConfigFromJson({{"dims", 16}}); }), "unknown-key");
  EXPECT_EQ(CodeOf([] { NetConfigFromJson({{"dim", "16"}}); }),
            "invalid-config");
  EXPECT_EQ(CodeOf([] { NetConfigFromJson({{"dim", 1.5}}); }),
            "invalid-config");
  EXPECT_EQ(CodeOf([] { NetConfigFromJson({{"position_scale", "cm"}}); }),
            "invalid-config");
  EXPECT_EQ(CodeOf([] { NetConfigFromJson(nlohmann::json::array()); }),
            "invalid-config");
}

TEST(AblationJson, Roundtrip) {
  AblationSwitches a;
  a.propagation = false;
  const AblationSwitches b = AblationFromJson(AblationToJson(a));
  EXPECT_TRUE(b.source_cross);
  EXPECT_FALSE(b.propagation);
  EXPECT_TRUE(b.correlation);
  EXPECT_EQ(CodeOf([] { AblationFromJson({{"propagation", 0}}); }),
            "invalid-config");
}

TEST(SceneConfigJson, Roundtrip) {
  SceneConfig c;
  c.num_points = 30;
  c.view_dropout = {0.1, -1, 0.3};
  c.id_prefix = "img";
  const SceneConfig back = SceneConfigFromJson(SceneConfigToJson(c));
  EXPECT_EQ(SceneConfigToJson(back), SceneConfigToJson(c));
  EXPECT_EQ(back.view_dropout, c.view_dropout);
  EXPECT_EQ(CodeOf([] { SceneConfigFromJson({{"points", 3}}); }),
            "unknown-key");
}

}  // namespace
}  // namespace comatcher

#include "comatcher/geometry/group_tracks.h"

#include <gtest/gtest.h>

namespace comatcher {
namespace {

TEST(GroupTracks, ChainsPairwiseMatches) {
  PairMatchMap m;
  m[{0, 1}] = {{0, 2}, {1, 0}};
  m[{1, 2}] = {{2, 1}};
  const GroupTracks t = GroupTracks::Build({3, 3, 3}, m);
  ASSERT_EQ(t.tracks().size(), 2u);
  EXPECT_EQ(t.tracks()[0], (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(t.tracks()[1], (std::vector<int>{1, 0, -1}));
  EXPECT_EQ(t.Projection(0, 0, 2), 1);
  EXPECT_EQ(t.Projection(2, 1, 0), 0);
  EXPECT_FALSE(t.Projection(0, 1, 2).has_value());
  EXPECT_EQ(t.TrackOf(2, 0), -1);
  EXPECT_EQ(t.Partners(1, 2).size(), 2u);
}

TEST(GroupTracks, DropsConflictingComponents) {
  PairMatchMap m;
  m[{0, 1}] = {{0, 0}, {1, 1}};
  m[{1, 2}] = {{0, 0}, {1, 0}};
  m[{0, 2}] = {{2, 2}};
  const GroupTracks t = GroupTracks::Build({3, 2, 3}, m);
  ASSERT_EQ(t.tracks().size(), 1u);
  EXPECT_EQ(t.tracks()[0], (std::vector<int>{2, -1, 2}));
  EXPECT_EQ(t.TrackOf(0, 0), -1);
}

TEST(GroupTracks, RestrictReindexesViews) {
  PairMatchMap m;
  m[{0, 1}] = {{0, 1}};
  m[{1, 2}] = {{1, 0}};
  const GroupTracks t = GroupTracks::Build({1, 2, 1}, m).Restrict({2, 0});
  EXPECT_EQ(t.num_views(), 2);
  ASSERT_EQ(t.tracks().size(), 1u);
  EXPECT_EQ(t.tracks()[0], (std::vector<int>{0, 0}));
  EXPECT_EQ(t.Projection(0, 0, 1), 0);
}

TEST(RelativePosition, TrackAndFallback) {
  PairMatchMap m;
  m[{0, 1}] = {{0, 1}};
  const GroupTracks t = GroupTracks::Build({2, 2}, m);
  const std::vector<PixelPoint> kp = {{4, 7}, {10, 10}};
  const PixelPoint d = RelativePosition(0, 0, 0, 1, t, kp);
  EXPECT_EQ(d.x, 6.0);
  EXPECT_EQ(d.y, 3.0);
  const PixelPoint z = RelativePosition(1, 0, 0, 1, t, kp);
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
  EXPECT_EQ(GroupTracks::Empty({3, 3}).tracks().size(), 0u);
}

}  // namespace
}  // namespace comatcher

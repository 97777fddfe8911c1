#include "support/golden.hpp"

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kGoldenDir = fs::path(ARC_TEST_DATA_DIR) / "golden";

}  // namespace

TEST(Golden, AtLeastFiveCommittedFrames) {
    const auto frames = arc::testing::load_golden_frames(kGoldenDir);
    ASSERT_GE(frames.size(), 5u);
    for (const auto& f : frames) {
        EXPECT_TRUE(fs::exists(f.path)) << f.path;
        EXPECT_EQ(f.expected.size(), arc::preprocess::stage_file_names().size());
    }
}

TEST(Golden, StageDigestsMatchCommittedValues) {
    for (const auto& f : arc::testing::load_golden_frames(kGoldenDir)) {
        const auto got = arc::testing::stage_digests(arc::vision::read_image(f.path));
        ASSERT_EQ(got.size(), f.expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i], f.expected[i]) << f.path.filename() << " " << f.expected[i].stage;
        }
        EXPECT_EQ(got.back().height, 150);
        EXPECT_EQ(got.back().width, 150);
        EXPECT_EQ(got.back().channels, 3);
    }
}

TEST(Golden, RepeatedRunsAreIdentical) {
    const auto frames = arc::testing::load_golden_frames(kGoldenDir);
    ASSERT_FALSE(frames.empty());
    const auto img = arc::vision::read_image(frames.front().path);
    EXPECT_EQ(arc::testing::stage_digests(img), arc::testing::stage_digests(img));
}

TEST(Golden, DumpedStagesRoundTrip) {
    const auto frames = arc::testing::load_golden_frames(kGoldenDir);
    ASSERT_FALSE(frames.empty());
    const auto out = fs::temp_directory_path() / "arc_golden_dump";
    fs::remove_all(out);
    arc::preprocess::PipelineTrace trace;
    arc::preprocess::preprocess(arc::vision::read_image(frames.front().path), {}, &trace);
    arc::preprocess::dump_stages(trace, out);
    const auto& names = arc::preprocess::stage_file_names();
    const auto rasters = arc::preprocess::stage_rasters(trace);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto back = arc::vision::read_image(out / names[i]);
        EXPECT_EQ(arc::testing::raster_digest(back), frames.front().expected[i].sha256) << names[i];
        EXPECT_EQ(back, *rasters[i]);
    }
}

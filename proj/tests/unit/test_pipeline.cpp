#include <set>

#include <gtest/gtest.h>

#include "vid3d/dataset.hpp"
#include "vid3d/hashing.hpp"
#include "vid3d/pipeline.hpp"

using namespace vid3d;

namespace {

std::vector<FrameViewSet> frames(int n, int views = 3, int res = 32) {
    return make_synthetic_dataset(SyntheticScene::blobs(25, 8, 0.4), n, views, res).frames;
}

OptimConfig tiny() {
    OptimConfig c;
    c.n_splats = 80;
    c.n_steps = 30;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(FrameSeed, PureAndDistinct) {
    EXPECT_EQ(derive_frame_seed(1, 3), derive_frame_seed(1, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t g = 0; g < 5; ++g)
        for (int f = 0; f < 50; ++f) seen.insert(derive_frame_seed(g, f));
    EXPECT_EQ(seen.size(), 250u);
}

TEST(ConfigHash, CanonicalAndSensitive) {
    const nlohmann::json a = {{"b", 1}, {"a", {{"y", 2}, {"x", 3}}}};
    const nlohmann::json b = nlohmann::json::parse(R"({"a":{"x":3,"y":2},"b":1})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash({{"b", 2}, {"a", {{"y", 2}, {"x", 3}}}}));
    EXPECT_EQ(config_hash(a).size(), 64u);
    EXPECT_EQ(sha256_hex(std::string("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pipeline, SubsetReconstructionIsBitIdentical) {
    const auto all = frames(3);
    const auto full = reconstruct_video(all, tiny());
    ASSERT_TRUE(full.ok());
    const auto alone = reconstruct_video({all[1]}, tiny());
    ASSERT_EQ(alone.video.frame_count(), 1u);
    EXPECT_EQ(alone.video.frame_indices[0], 1);
    Video3D a, b;
    a.clouds = {full.video.clouds[1]};
    b.clouds = {alone.video.clouds[0]};
    a.frame_indices = b.frame_indices = {1};
    EXPECT_EQ(encode_video3d(a), encode_video3d(b));
    EXPECT_EQ(full.video.provenance.frame_seeds[1], alone.video.provenance.frame_seeds[0]);
}

TEST(Pipeline, SerialAndParallelAgreeByteForByte) {
    const auto all = frames(4);
    PipelineOptions serial, parallel;
    parallel.workers = 8;
    const auto a = reconstruct_video(all, tiny(), serial);
    const auto b = reconstruct_video(all, tiny(), parallel);
    EXPECT_EQ(encode_video3d(a.video), encode_video3d(b.video));
    EXPECT_EQ(a.traces.size(), 4u);
    for (std::size_t f = 0; f < 4; ++f) {
        ASSERT_EQ(a.traces[f].size(), b.traces[f].size());
        for (std::size_t s = 0; s < a.traces[f].size(); ++s) EXPECT_EQ(a.traces[f][s].loss, b.traces[f][s].loss);
    }
}

TEST(Pipeline, FailedFrameIsReportedOthersComplete) {
    auto all = frames(3);
    all[1].views[0].image.data[0] = std::numeric_limits<float>::quiet_NaN();
    const auto r = reconstruct_video(all, tiny());
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].frame_index, 1);
    EXPECT_NE(r.failures[0].message.find("step 0"), std::string::npos);
    EXPECT_EQ(r.video.clouds[0].size(), 80u);
    EXPECT_TRUE(r.video.clouds[1].empty());
    EXPECT_EQ(r.video.clouds[2].size(), 80u);
}

TEST(Pipeline, ProvenanceRecordsConfigHash) {
    PipelineOptions o;
    o.run_config = {{"optim", tiny().to_json()}, {"note", "x"}};
    const auto r = reconstruct_video(frames(1), tiny(), o);
    EXPECT_EQ(r.video.provenance.config, o.run_config);
    EXPECT_EQ(r.video.provenance.config_hash, config_hash(o.run_config));
    EXPECT_EQ(r.video.provenance.global_seed, 5u);
    EXPECT_EQ(r.video.provenance.frame_seeds[0], derive_frame_seed(5, 0));
}

TEST(Pipeline, ZeroStepsGivesInitClouds) {
    OptimConfig c = tiny();
    c.n_steps = 0;
    const auto all = frames(2);
    const auto r = reconstruct_video(all, c);
    OptimConfig fc = c;
    fc.seed = derive_frame_seed(c.seed, 1);
    Video3D a, b;
    a.clouds = {r.video.clouds[1]};
    b.clouds = {init_cloud(all[1], fc)};
    a.frame_indices = b.frame_indices = {1};
    EXPECT_EQ(encode_video3d(a), encode_video3d(b));
}

TEST(Pipeline, CheckpointsCarryFrameIndex) {
    PipelineOptions o;
    o.checkpoint_interval = 10;
    std::mutex m;
    std::set<std::pair<int, int>> seen;
    o.checkpoint = [&](int frame, int step, const GaussianCloud&) {
        std::lock_guard l(m);
        seen.insert({frame, step});
    };
    o.workers = 2;
    reconstruct_video(frames(2), tiny(), o);
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_TRUE(seen.count({1, 30}));
}

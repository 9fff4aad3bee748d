#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "support/random_scene.hpp"
#include "vid3d/dataset.hpp"
#include "vid3d/error.hpp"
#include "vid3d/evaluate.hpp"
#include "vid3d/metrics.hpp"
#include "vid3d/synthetic.hpp"

using namespace vid3d;
namespace fs = std::filesystem;

namespace {

// Maps images to e0 except those equal to `special`, which go to e1.
class SplitEmbedder : public Embedder {
public:
    explicit SplitEmbedder(Image special) : special_(std::move(special)) {}
    Eigen::VectorXd embed(const Image& img) override {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
        v[img == special_ ? 1 : 0] = 1.0;
        return v;
    }
    int dimension() const override { return 4; }
    std::string id() const override { return "split"; }

private:
    Image special_;
};

class FailingEmbedder : public Embedder {
public:
    Eigen::VectorXd embed(const Image& img) override {
        if (img.data[0] > 0.5f) throw EmbedResponseError("bad");
        return Eigen::VectorXd::Unit(3, 0);
    }
    int dimension() const override { return 3; }
    std::string id() const override { return "failing"; }
};

Video3D gt_video(int frames, std::uint64_t seed = 3, double motion = 0.3) {
    const auto scene = SyntheticScene::blobs(60, seed, motion);
    Video3D v;
    for (int f = 0; f < frames; ++f) {
        v.clouds.push_back(scene.frame(f));
        v.frame_indices.push_back(f);
    }
    return v;
}

Image reference_of(std::uint64_t seed, int res) {
    const auto in = Intrinsics::for_orbit(res, res);
    const auto cam = orbit_cameras(1, 2.0, 0.0, Eigen::Vector3d::Zero(), in).front();
    return quantized(render(SyntheticScene::blobs(60, seed, 0.3).frame(0), cam).image);
}

}  // namespace

TEST(Surrogate, UnitNormDeterministicNonNegative) {
    std::mt19937_64 rng(1);
    SurrogateEmbedder e;
    EXPECT_EQ(e.dimension(), 256);
    for (int i = 0; i < 10; ++i) {
        const Image img = vid3d::testing::random_image(rng, 20 + i, 30 - i);
        const auto a = e.embed(img), b = e.embed(img);
        ASSERT_EQ(a.size(), 256);
        EXPECT_NEAR(a.norm(), 1.0, 1e-5);
        EXPECT_EQ(a, b);
        EXPECT_GE(a.minCoeff(), 0.0);
    }
}

TEST(Surrogate, NoiseLowersCosine) {
    std::mt19937_64 rng(2);
    SurrogateEmbedder e;
    const Image ref = reference_of(3, 64);
    Image noisy = ref;
    std::uniform_real_distribution<float> u(0, 1);
    std::bernoulli_distribution half(0.5);
    for (auto& v : noisy.data)
        if (half(rng)) v = u(rng);
    EXPECT_DOUBLE_EQ(e.embed(ref).dot(e.embed(ref)), 1.0);
    EXPECT_LT(e.embed(ref).dot(e.embed(noisy)), 1.0);
}

TEST(ClipI, IdenticalFramesGiveOne) {
    const Image ref = reference_of(4, 32);
    SurrogateEmbedder e;
    const std::vector<std::vector<Image>> videos(3, std::vector<Image>(4, ref));
    const auto r = clip_i(ref, videos, e);
    EXPECT_NEAR(r.clip_i, 1.0, 1e-12);
    EXPECT_EQ(r.embedder, "surrogate-v1");
}

TEST(ClipI, OrthogonalEmbeddingsGiveZero) {
    const Image ref(4, 4, 3, 0.3f), other(4, 4, 3, 0.7f);
    SplitEmbedder e(ref);
    const std::vector<std::vector<Image>> videos(2, std::vector<Image>(5, other));
    EXPECT_EQ(clip_i(ref, videos, e).clip_i, 0.0);
}

TEST(ClipI, PermutationInvariantAndBounded) {
    std::mt19937_64 rng(5);
    SurrogateEmbedder e;
    const Image ref = vid3d::testing::random_image(rng, 16, 16);
    std::vector<std::vector<Image>> videos(3);
    for (auto& v : videos)
        for (int f = 0; f < 4; ++f) v.push_back(vid3d::testing::random_image(rng, 16, 16));
    const auto a = clip_i(ref, videos, e);
    auto shuffled = videos;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto& v : shuffled) std::shuffle(v.begin(), v.end(), rng);
    EXPECT_NEAR(clip_i(ref, shuffled, e).clip_i, a.clip_i, 1e-12);
    for (const auto& row : a.similarity)
        for (double s : row) {
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
        }
}

TEST(ClipI, FailureCarriesCoordinates) {
    std::vector<std::vector<Image>> videos(3, std::vector<Image>(4, Image(2, 2, 3, 0.1f)));
    videos[2][3] = Image(2, 2, 3, 0.9f);
    FailingEmbedder e;
    try {
        clip_i(Image(2, 2, 3, 0.0f), videos, e);
        FAIL() << "expected EmbedResponseError";
    } catch (const EmbedResponseError& err) {
        EXPECT_NE(std::string(err.what()).find("view 2 frame 3"), std::string::npos);
    }
}

TEST(EvalVideos, ShapeAndDeterminism) {
    EvalOptions o;
    o.resolution = 24;
    const auto one = render_eval_videos(gt_video(1), o);
    ASSERT_EQ(one.size(), 10u);
    for (const auto& seq : one) EXPECT_EQ(seq.size(), 1u);
    const auto v = gt_video(3);
    EXPECT_EQ(render_eval_videos(v, o), render_eval_videos(v, o));
}

TEST(EvalVideos, CamerasFollowOrbitConvention) {
    const auto cams = eval_cameras(gt_video(1));
    ASSERT_EQ(cams.size(), 10u);
    for (int k = 0; k < 10; ++k) {
        EXPECT_NEAR(cams[k].center().z(), 0.0, 1e-12);
        EXPECT_NEAR(cams[k].center().norm(), 2.0, 1e-12);
        EXPECT_EQ(cams[k].width, 256);
    }
}

TEST(Evaluate, MatrixMeanAndPsnr) {
    EvalOptions o;
    o.resolution = 32;
    const auto v = gt_video(4);
    SurrogateEmbedder e;
    const auto r = evaluate_video(v, reference_of(3, 32), e, &v, o);
    ASSERT_EQ(r.similarity.size(), 10u);
    ASSERT_EQ(r.similarity[0].size(), 4u);
    EXPECT_EQ(r.clip_i, matrix_mean(r.similarity));
    ASSERT_TRUE(r.psnr.has_value());
    EXPECT_EQ(*r.psnr, kPsnrSentinel);
    const auto back = EvalReport::from_json(r.to_json());
    EXPECT_EQ(back.to_json(), r.to_json());
}

TEST(Evaluate, DegradationLowersClipI) {
    EvalOptions o;
    o.resolution = 64;
    o.n_cameras = 6;
    SurrogateEmbedder e;
    const double sigmas[] = {0.0, 0.05, 0.1, 0.2, 0.4};
    double mean[5] = {};
    for (std::uint64_t seed : {3, 4, 5}) {
        const auto v = gt_video(3, seed);
        const Image ref = reference_of(seed, 64);
        for (int s = 0; s < 5; ++s) {
            Video3D noisy = v;
            for (std::size_t f = 0; f < noisy.clouds.size(); ++f)
                noisy.clouds[f] = add_parameter_noise(v.clouds[f], sigmas[s], seed * 100 + f);
            mean[s] += evaluate_video(noisy, ref, e, nullptr, o).clip_i / 3.0;
        }
    }
    for (int s = 1; s < 5; ++s) EXPECT_LE(mean[s], mean[s - 1]) << "sigma " << sigmas[s];
}

TEST(Tables, MethodComparisonFixture) {
    const std::string t = format_table("Model", "CLIP-I",
                                       {{"Animate124", 0.8544}, {"DreamGaussian4D", 0.9227}, {"Vid3D", 0.8946}});
    EXPECT_EQ(t,
              "Model           | CLIP-I\n"
              "----------------|-------\n"
              "Animate124      | 0.8544\n"
              "DreamGaussian4D | 0.9227\n"
              "Vid3D           | 0.8946\n");
}

TEST(Tables, ViewCountFixture) {
    const std::string t = format_table("Number of views", "CLIP-I", {{"3", 0.8532}, {"9", 0.8879}, {"18", 0.8946}});
    EXPECT_EQ(t,
              "Number of views | CLIP-I\n"
              "----------------|-------\n"
              "3               | 0.8532\n"
              "9               | 0.8879\n"
              "18              | 0.8946\n");
}

TEST(Tables, MotionFixture) {
    const std::string t = format_table("Motion score", "CLIP-I", {{"120", 0.8946}, {"160", 0.8893}, {"200", 0.8897}});
    EXPECT_EQ(t,
              "Motion score | CLIP-I\n"
              "-------------|-------\n"
              "120          | 0.8946\n"
              "160          | 0.8893\n"
              "200          | 0.8897\n");
}

TEST(Ablation, DecimationGivesNestedSubsets) {
    EXPECT_EQ(decimate_views(18, 3), (std::vector<int>{0, 6, 12}));
    EXPECT_EQ(decimate_views(18, 9), (std::vector<int>{0, 2, 4, 6, 8, 10, 12, 14, 16}));
    EXPECT_EQ(decimate_views(18, 18).size(), 18u);
    const auto s3 = decimate_views(18, 3), s9 = decimate_views(18, 9);
    for (int i : s3) EXPECT_NE(std::find(s9.begin(), s9.end(), i), s9.end());
    EXPECT_THROW(decimate_views(18, 4), InvalidArgument);
    EXPECT_THROW(decimate_views(3, 9), InvalidArgument);
}

TEST(Ablation, GridParsing) {
    const auto g = AblationGrid::from_json({{"views", {3, 9, 18}}});
    EXPECT_EQ(g.views, (std::vector<int>{3, 9, 18}));
    EXPECT_EQ(g.seeds, (std::vector<std::uint64_t>{0}));
    EXPECT_THROW(AblationGrid::from_json(nlohmann::json::object()), InvalidArgument);
    EXPECT_THROW(AblationGrid::from_json({{"views", nlohmann::json::array()}}), InvalidArgument);
    EXPECT_THROW(AblationGrid::from_json({{"views", {0}}}), InvalidArgument);
    EXPECT_THROW(AblationGrid::from_json({{"views", "three"}}), InvalidArgument);
    EXPECT_EQ(motion_dataset_path("/d", 160).string(), "/d/motion_160");
    EXPECT_EQ(motion_dataset_path("/d", 0.25).string(), "/d/motion_0.25");
}

TEST(Ablation, RunsCellsAndRecordsFailures) {
    const fs::path root = fs::temp_directory_path() / ("vid3d_ablate_" + std::to_string(::getpid()));
    fs::remove_all(root);
    synth_dataset(SyntheticScene::blobs(20, 6, 0.2), 2, 6, 24, root);
    AblationGrid g;
    g.views = {6, 3, 4};
    g.seeds = {0, 1};
    g.eval.resolution = 24;
    g.eval.n_cameras = 3;
    OptimConfig c;
    c.n_splats = 60;
    c.n_steps = 20;
    SurrogateEmbedder e;
    const auto reports = ablate(root, g, c, e);
    ASSERT_EQ(reports.size(), 6u);
    for (const auto& r : reports) {
        if (r.config["n_views"] == 4) {
            EXPECT_TRUE(r.error.has_value());
        } else {
            ASSERT_FALSE(r.error.has_value()) << *r.error;
            EXPECT_EQ(r.similarity.size(), 3u);
            EXPECT_EQ(r.similarity[0].size(), 2u);
            EXPECT_TRUE(r.psnr.has_value());
            EXPECT_EQ(r.config["optim"]["n_steps"], 20);
        }
        EXPECT_EQ(r.config_hash.size(), 64u);
    }
    const std::string summary = ablation_summary(reports);
    EXPECT_LT(summary.find("\n3 "), summary.find("\n4 "));
    EXPECT_LT(summary.find("\n4 "), summary.find("\n6 "));
    fs::remove_all(root);
}

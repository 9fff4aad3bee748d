#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "vid3d/error.hpp"
#include "vid3d/loss.hpp"
#include "vid3d/metrics.hpp"
#include "vid3d/reconstruct.hpp"
#include "vid3d/synthetic.hpp"

using namespace vid3d;
namespace fs = std::filesystem;

namespace {

FrameViewSet small_views(std::uint64_t seed, int n_views = 6, int res = 48) {
    const auto scene = SyntheticScene::blobs(40, seed);
    const auto cams = orbit_cameras(n_views, 2.0, 0.0, Eigen::Vector3d::Zero(), Intrinsics::for_orbit(res, res));
    auto set = render_view_set(scene.frame(0), cams, 0);
    for (auto& v : set.views) v.image = quantized(v.image);
    return set;
}

OptimConfig small_config(int steps = 150) {
    OptimConfig c;
    c.n_splats = 200;
    c.n_steps = steps;
    return c;
}

bool same_cloud(const GaussianCloud& a, const GaussianCloud& b) {
    if (a.size() != b.size() || a.background != b.background) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto &g = a.gaussians[i], &h = b.gaussians[i];
        if (g.mean != h.mean || g.rotation != h.rotation || g.log_scale != h.log_scale ||
            g.opacity_logit != h.opacity_logit || g.color != h.color)
            return false;
    }
    return true;
}

double heldout_loss(const GaussianCloud& cloud, std::uint64_t seed) {
    const auto scene = SyntheticScene::blobs(40, seed);
    const auto cams = orbit_cameras(5, 2.0, 0.0, Eigen::Vector3d::Zero(), Intrinsics::for_orbit(48, 48), 0.3);
    double acc = 0;
    for (const auto& c : cams) acc += photometric_loss(render(cloud, c).image, render(scene.frame(0), c).image, 0.2).value;
    return acc / cams.size();
}

}  // namespace

TEST(InitCloud, ExactBudgetDeterministicAndInsideBall) {
    const auto views = small_views(1);
    OptimConfig c = small_config();
    c.n_splats = 100;
    const auto a = init_cloud(views, c), b = init_cloud(views, c);
    EXPECT_EQ(a.size(), 100u);
    EXPECT_TRUE(same_cloud(a, b));
    EXPECT_TRUE(a.valid());
    const Eigen::Vector3d center = views.look_at();
    EXPECT_LT(center.norm(), 1e-9);
    for (const auto& g : a.gaussians) EXPECT_LE((g.mean.cast<double>() - center).norm(), 1.1);
    c.seed = 1;
    EXPECT_FALSE(same_cloud(a, init_cloud(views, c)));
}

TEST(Optimize, ZeroStepsReturnsInitialization) {
    const auto views = small_views(2);
    const OptimConfig c = small_config(0);
    const auto r = optimize_frame(views, c);
    EXPECT_TRUE(r.trace.empty());
    EXPECT_TRUE(same_cloud(r.cloud, init_cloud(views, c)));
}

TEST(Optimize, DeterministicTraceAndCloud) {
    const auto views = small_views(3);
    const auto c = small_config(60);
    const auto a = optimize_frame(views, c), b = optimize_frame(views, c);
    ASSERT_EQ(a.trace.size(), 60u);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].loss, b.trace[i].loss);
        EXPECT_EQ(a.trace[i].psnr_train, b.trace[i].psnr_train);
    }
    EXPECT_TRUE(same_cloud(a.cloud, b.cloud));
}

TEST(Optimize, LossFiniteAndDecreasing) {
    double first = 0, last = 0;
    for (std::uint64_t seed : {0, 1, 2}) {
        auto c = small_config(300);
        c.seed = seed;
        const auto r = optimize_frame(small_views(10 + seed), c);
        for (const auto& s : r.trace) ASSERT_TRUE(std::isfinite(s.loss));
        // compare over one full round of views
        for (int k = 0; k < 6; ++k) {
            first += r.trace[k].loss;
            last += r.trace[r.trace.size() - 1 - k].loss;
        }
        EXPECT_TRUE(r.cloud.valid(1e-6));
        for (const auto& g : r.cloud.gaussians) {
            EXPECT_GE(g.color.minCoeff(), 0.0f);
            EXPECT_LE(g.color.maxCoeff(), 1.0f);
        }
    }
    EXPECT_LT(last, first);
}

TEST(Optimize, NonFiniteLossNamesStep) {
    auto views = small_views(4, 3);
    views.views[1].image.data[10] = std::numeric_limits<float>::quiet_NaN();
    try {
        optimize_frame(views, small_config(10));
        FAIL() << "expected NonFiniteLossError";
    } catch (const NonFiniteLossError& e) {
        EXPECT_EQ(e.step(), 1);  // round robin reaches view 1 at step 1
        EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
    }
}

TEST(Optimize, RejectsInvalidInput) {
    FrameViewSet empty;
    EXPECT_THROW(optimize_frame(empty, small_config()), InvalidArgument);
    auto views = small_views(5, 3);
    views.views[2].image = Image(40, 48, 3);
    EXPECT_THROW(optimize_frame(views, small_config()), InvalidArgument);
    OptimConfig c = small_config();
    c.lambda_dssim = 2.0;
    EXPECT_THROW(optimize_frame(small_views(5, 3), c), InvalidArgument);
}

TEST(Optimize, RoundRobinUsesEveryViewOncePerWindow) {
    for (int n : {1, 3, 9, 18}) {
        for (int start = 0; start < 40; ++start) {
            std::vector<int> seen(n, 0);
            for (int s = start; s < start + n; ++s) ++seen[round_robin_view(s, n)];
            for (int v : seen) EXPECT_EQ(v, 1);
        }
    }
}

TEST(Optimize, CheckpointHookFires) {
    std::vector<int> steps;
    CheckpointHook hook{20, [&](int step, const GaussianCloud& c) {
                            steps.push_back(step);
                            EXPECT_TRUE(c.valid(1e-5));
                        }};
    optimize_frame(small_views(6, 3), small_config(60), hook);
    EXPECT_EQ(steps, (std::vector<int>{20, 40, 60}));
}

TEST(Prune, RemovesOnlyTransparentSplats) {
    GaussianCloud cloud;
    for (double o : {0.5, 0.001, 0.9, 0.004, 0.006}) {
        Gaussian3D g;
        g.opacity_logit = static_cast<float>(logit(o));
        cloud.gaussians.push_back(g);
    }
    const auto kept = prune_cloud(cloud, 0.005);
    EXPECT_EQ(kept, (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(cloud.size(), 3u);
}

TEST(Prune, BarelyChangesHeldOutLoss) {
    for (std::uint64_t seed : {20, 21}) {
        auto c = small_config(400);
        c.prune_interval = 0;
        GaussianCloud cloud = optimize_frame(small_views(seed), c).cloud;
        const double before = heldout_loss(cloud, seed);
        prune_cloud(cloud, c.prune_opacity_threshold);
        EXPECT_LE(heldout_loss(cloud, seed), before * 1.01);
    }
}

TEST(Config, JsonRoundTrip) {
    OptimConfig c;
    c.n_splats = 1234;
    c.lr.color = 0.01;
    c.background = {0.1f, 0.2f, 0.3f};
    c.view_selection = ViewSelection::Random;
    c.seed = 99;
    const auto back = OptimConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_THROW(OptimConfig::from_json({{"view_selection", "sideways"}}), InvalidArgument);
}

TEST(Config, FullScaleDefaults) {
    const OptimConfig c;
    EXPECT_EQ(c.n_splats, 100000);
    EXPECT_EQ(c.n_steps, 4000);
    EXPECT_DOUBLE_EQ(c.lambda_dssim, 0.2);
    EXPECT_EQ(c.view_selection, ViewSelection::RoundRobin);
}

TEST(Trace, CsvHasHeaderAndRows) {
    const auto path = fs::temp_directory_path() / "vid3d_trace_test.csv";
    write_loss_trace_csv(path, {{0, 0.5, 12.0}, {1, 0.25, 14.5}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,loss,psnr_train");
    std::getline(in, line);
    EXPECT_EQ(line, "0,0.5,12");
    std::getline(in, line);
    EXPECT_EQ(line, "1,0.25,14.5");
    fs::remove(path);
}

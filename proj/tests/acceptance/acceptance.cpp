#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "support/gradcheck.hpp"
#include "support/random_scene.hpp"
#include "vid3d/dataset.hpp"
#include "vid3d/error.hpp"
#include "vid3d/evaluate.hpp"
#include "vid3d/hashing.hpp"
#include "vid3d/metrics.hpp"
#include "vid3d/pipeline.hpp"
#include "vid3d/synthetic.hpp"
#include "vid3d/video3d.hpp"

using namespace vid3d;
using namespace vid3d::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, double(std::abs(a.data[i] - b.data[i])));
    return m;
}

Image kink_free_target(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<float> u(0.0f, 0.8f);
    std::bernoulli_distribution side(0.5);
    Image t(w, h, 3);
    for (auto& v : t.data) v = side(rng) ? -1.0f + u(rng) : 1.2f + u(rng);
    return t;
}

Outcome a1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(5, 50);
    std::array<std::vector<double>, kGroupCount> errs;
    for (int scene = 0; scene < 20; ++scene) {
        const GaussianCloud cloud = random_cloud(rng, count(rng));
        const Camera cam = random_orbit_camera(rng, 32);
        const auto r = gradcheck(cloud, cam, kink_free_target(rng, 32, 32));
        for (int g = 0; g < kGroupCount; ++g) errs[g].insert(errs[g].end(), r.rel_errors[g].begin(), r.rel_errors[g].end());
    }
    const double dt = seconds_since(t0);
    Outcome o;
    o.pass = dt < 120.0;
    for (int g = 0; g < kGroupCount; ++g) {
        const double p95 = percentile(errs[g], 0.95);
        o.pass = o.pass && !errs[g].empty() && p95 <= 1e-2;
        o.detail += fmt("%s p95=%.2e (n=%zu), ", kGroupNames[g].c_str(), p95, errs[g].size());
    }
    o.detail += fmt("%.1fs", dt);
    return o;
}

// Oracle reconstruction shared by A2 and A3: psnr[views][seed].
constexpr int kOracleSeeds = 3;
std::map<int, std::array<double, kOracleSeeds>> oracle_psnr;

double held_out_psnr(const GaussianCloud& fit, const GaussianCloud& gt, int res) {
    const auto in = Intrinsics::for_orbit(res, res);
    const auto cams = orbit_cameras(10, Intrinsics::kDefaultOrbitRadius, 0.0, Eigen::Vector3d::Zero(), in,
                                    5.0 * std::numbers::pi / 180.0);
    double acc = 0;
    for (const auto& c : cams) acc += psnr(render(fit, c).image, render(gt, c).image);
    return acc / static_cast<double>(cams.size());
}

void run_oracle(const std::vector<int>& view_counts) {
    for (int seed = 0; seed < kOracleSeeds; ++seed) {
        const auto scene = SyntheticScene::blobs(200, 100 + seed);
        const Dataset ds = make_synthetic_dataset(scene, 1, 18, 128);
        const GaussianCloud gt = scene.frame(0);
        for (int n : view_counts) {
            if (oracle_psnr.contains(n) && oracle_psnr[n][seed] != 0.0) continue;
            OptimConfig cfg;
            cfg.n_splats = 1000;
            cfg.n_steps = 2000;
            cfg.seed = static_cast<std::uint64_t>(seed);
            cfg.background = ds.background;
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = optimize_frame(ds.frames[0].subset(decimate_views(18, n)), cfg);
            oracle_psnr[n][seed] = held_out_psnr(res.cloud, gt, 128);
            std::printf("  oracle seed %d, %2d views: held-out %.2f dB (%.1fs)\n", seed, n, oracle_psnr[n][seed],
                        seconds_since(t0));
            std::fflush(stdout);
        }
    }
}

double mean_of(const std::array<double, kOracleSeeds>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / kOracleSeeds;
}

Outcome a2() {
    const auto t0 = std::chrono::steady_clock::now();
    run_oracle({18});
    const double m = mean_of(oracle_psnr[18]);
    return {m >= 28.0, fmt("mean held-out PSNR %.2f dB over %d seeds (>= 28), %.0fs", m, kOracleSeeds, seconds_since(t0))};
}

Outcome a3() {
    const auto t0 = std::chrono::steady_clock::now();
    run_oracle({18, 9, 3});
    const double p3 = mean_of(oracle_psnr[3]), p9 = mean_of(oracle_psnr[9]), p18 = mean_of(oracle_psnr[18]);
    const bool pass = p3 < p9 && p9 <= p18 && (p9 - p3) > (p18 - p9);
    return {pass, fmt("PSNR(3)=%.2f PSNR(9)=%.2f PSNR(18)=%.2f, gaps %.2f vs %.2f, %.0fs", p3, p9, p18, p9 - p3,
                      p18 - p9, seconds_since(t0))};
}

Outcome a4() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto frames = make_synthetic_dataset(SyntheticScene::blobs(40, 9, 0.4), 6, 3, 32).frames;
    OptimConfig cfg;
    cfg.n_splats = 120;
    cfg.n_steps = 40;
    cfg.seed = 11;
    PipelineOptions serial, parallel;
    parallel.workers = 8;
    const auto a = reconstruct_video(frames, cfg, serial);
    const auto b = reconstruct_video(frames, cfg, parallel);
    const std::string ha = sha256_hex(encode_video3d(a.video)), hb = sha256_hex(encode_video3d(b.video));
    int identical = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto alone = reconstruct_video({frames[f]}, cfg);
        Video3D x, y;
        x.clouds = {a.video.clouds[f]};
        y.clouds = {alone.video.clouds[0]};
        x.frame_indices = y.frame_indices = {frames[f].frame_index};
        identical += encode_video3d(x) == encode_video3d(y) &&
                     alone.video.provenance.frame_seeds[0] == a.video.provenance.frame_seeds[f];
    }
    const bool pass = a.ok() && b.ok() && ha == hb && identical == static_cast<int>(frames.size());
    return {pass, fmt("%d/%zu frames bit-identical alone, serial %.12s vs 8 workers %.12s, %.1fs", identical,
                      frames.size(), ha.c_str(), hb.c_str(), seconds_since(t0))};
}

Outcome a5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scene = SyntheticScene::blobs(200, 7, 0.3);
    Video3D gt;
    for (int f = 0; f < 25; ++f) {
        gt.clouds.push_back(scene.frame(f));
        gt.frame_indices.push_back(f);
    }
    const EvalOptions opts;
    const auto in = Intrinsics::for_orbit(opts.resolution, opts.resolution);
    const Camera ref_cam = orbit_cameras(1, Intrinsics::kDefaultOrbitRadius, 0.0, Eigen::Vector3d::Zero(), in).front();
    const Image reference = quantized(render(gt.clouds[0], ref_cam).image);

    SurrogateEmbedder embedder;
    const auto clean = evaluate_video(gt, reference, embedder, nullptr, opts);
    Video3D noisy = gt;
    for (std::size_t f = 0; f < noisy.clouds.size(); ++f) noisy.clouds[f] = add_parameter_noise(gt.clouds[f], 0.1, 500 + f);
    const auto degraded = evaluate_video(noisy, reference, embedder, nullptr, opts);

    const bool shape = clean.similarity.size() == 10 &&
                       std::all_of(clean.similarity.begin(), clean.similarity.end(),
                                   [](const auto& row) { return row.size() == 25; });
    const bool mean_exact = clean.clip_i == matrix_mean(clean.similarity);
    const bool pass = shape && mean_exact && clean.clip_i >= 0.95 && clean.clip_i > degraded.clip_i;
    return {pass, fmt("matrix %zux%zu, clip_i==mean %s, ground truth %.4f, noise 0.1 %.4f, %.1fs", clean.similarity.size(),
                      clean.similarity.empty() ? 0 : clean.similarity[0].size(), mean_exact ? "yes" : "no",
                      clean.clip_i, degraded.clip_i, seconds_since(t0))};
}

Outcome a6() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kCases = 100;
    int tiling = 0, permutation = 0, determinism = 0, transparent = 0;
    double worst_tiling = 0;
    std::mt19937_64 rng(606);
    for (int i = 0; i < kCases; ++i) {
        const GaussianCloud cloud = random_cloud(rng, 25);
        const Camera cam = random_orbit_camera(rng, 40);
        const auto base = render(cloud, cam);

        RenderOptions other;
        other.tile_size = 1 + i % 13;
        RenderOptions large;
        large.tile_size = 64;
        const double d = std::max(max_abs_diff(base.image, render(cloud, cam, other).image),
                                  max_abs_diff(base.image, render(cloud, cam, large).image));
        worst_tiling = std::max(worst_tiling, d);
        tiling += d <= 1e-6;

        GaussianCloud shuffled = cloud;
        std::shuffle(shuffled.gaussians.begin(), shuffled.gaussians.end(), rng);
        permutation += render(shuffled, cam).image == base.image;

        RenderOptions serial;
        serial.parallel = false;
        determinism += render(cloud, cam).image_f64 == base.image_f64 &&
                       render(cloud, cam, serial).image_f64 == base.image_f64;

        GaussianCloud more = cloud;
        Gaussian3D extra = random_cloud(rng, 1).gaussians[0];
        extra.opacity_logit = -40.0f;
        more.gaussians.insert(more.gaussians.begin() + (i % (cloud.size() + 1)), extra);
        transparent += max_abs_diff(base.image, render(more, cam).image) <= 1e-6;
    }
    const bool pass = tiling == kCases && permutation == kCases && determinism == kCases && transparent == kCases;
    return {pass, fmt("tiling %d/%d (max %.1e), permutation %d/%d, determinism %d/%d, transparent %d/%d, %.1fs", tiling,
                      kCases, worst_tiling, permutation, kCases, determinism, kCases, transparent, kCases,
                      seconds_since(t0))};
}

bool same_dataset(const Dataset& a, const Dataset& b) {
    if (a.frames.size() != b.frames.size() || a.background != b.background) return false;
    if (a.seed.frames.size() != b.seed.frames.size() || !(a.seed.reference_image == b.seed.reference_image)) return false;
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        const auto& va = a.frames[f].views;
        const auto& vb = b.frames[f].views;
        if (va.size() != vb.size() || a.frames[f].frame_index != b.frames[f].frame_index) return false;
        for (std::size_t v = 0; v < va.size(); ++v) {
            const Camera &ca = va[v].camera, &cb = vb[v].camera;
            if (!(va[v].image == vb[v].image) || ca.rotation != cb.rotation || ca.translation != cb.translation ||
                ca.fx != cb.fx || ca.fy != cb.fy || ca.cx != cb.cx || ca.cy != cb.cy || ca.width != cb.width ||
                ca.height != cb.height)
                return false;
        }
    }
    return true;
}

Outcome a7() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path root = fs::temp_directory_path() / ("vid3d_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const auto scene = SyntheticScene::blobs(50, 21, 0.3);
    synth_dataset(scene, 3, 4, 32, root / "a", 80.0);
    const Dataset ingested = ingest_dataset(root / "a");
    export_dataset(root / "b", ingested);
    const bool dataset_ok = same_dataset(ingested, make_synthetic_dataset(scene, 3, 4, 32, 80.0)) &&
                            same_dataset(ingested, ingest_dataset(root / "b"));

    Video3D v = load_video3d(ground_truth_path(root / "a"));
    v.provenance.config = {{"note", "acceptance"}};
    v.provenance.config_hash = config_hash(v.provenance.config);
    save_video3d(root / "v.v3dz", v);
    const Video3D back = load_video3d(root / "v.v3dz");
    save_video3d(root / "w.v3dz", back);
    bool video_ok = encode_video3d(back) == encode_video3d(v) && back.frame_count() == 3 &&
                    back.provenance.config == v.provenance.config;
    for (std::size_t f = 0; video_ok && f < v.frame_count(); ++f) {
        const auto &x = v.clouds[f], &y = back.clouds[f];
        video_ok = x.size() == y.size() && x.background == y.background;
        for (std::size_t i = 0; video_ok && i < x.size(); ++i)
            video_ok = x.gaussians[i].mean == y.gaussians[i].mean && x.gaussians[i].rotation == y.gaussians[i].rotation &&
                       x.gaussians[i].log_scale == y.gaussians[i].log_scale &&
                       x.gaussians[i].opacity_logit == y.gaussians[i].opacity_logit &&
                       x.gaussians[i].color == y.gaussians[i].color;
    }

    const auto bytes = encode_video3d(v);
    std::size_t truncations = 0, checksum_errors = 0;
    for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 64) {
        ++truncations;
        try {
            decode_video3d(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + n));
        } catch (const ChecksumError&) {
            ++checksum_errors;
        } catch (...) {
        }
    }
    fs::remove_all(root);
    const bool pass = dataset_ok && video_ok && checksum_errors == truncations;
    return {pass, fmt("dataset round trip %s, v3dz round trip %s, %zu/%zu truncations raise checksum errors, %.1fs",
                      dataset_ok ? "lossless" : "LOSSY", video_ok ? "lossless" : "LOSSY", checksum_errors, truncations,
                      seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<std::string> only;
    app.add_option("--only", only, "criteria to run, e.g. A1 A4")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}};
    const std::set<std::string> selected(only.begin(), only.end());
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!selected.empty() && !selected.contains(name)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

#include "vid3d/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include <tbb/parallel_for.h>

#include "vid3d/dataset.hpp"
#include "vid3d/error.hpp"
#include "vid3d/hashing.hpp"
#include "vid3d/metrics.hpp"
#include "vid3d/pipeline.hpp"
#include "vid3d/rasterizer.hpp"

namespace vid3d {

nlohmann::json EvalOptions::to_json() const {
    return {{"n_cameras", n_cameras},
            {"resolution", resolution},
            {"elevation", elevation},
            {"azimuth_offset", azimuth_offset},
            {"radius", radius},
            {"tile_size", render.tile_size}};
}

EvalOptions EvalOptions::from_json(const nlohmann::json& j) {
    EvalOptions o;
    o.n_cameras = j.value("n_cameras", o.n_cameras);
    o.resolution = j.value("resolution", o.resolution);
    o.elevation = j.value("elevation", o.elevation);
    o.azimuth_offset = j.value("azimuth_offset", o.azimuth_offset);
    o.radius = j.value("radius", o.radius);
    o.render.tile_size = j.value("tile_size", o.render.tile_size);
    return o;
}

std::vector<Camera> eval_cameras(const Video3D& video, const EvalOptions& options) {
    if (options.n_cameras < 1) throw InvalidArgument("n_cameras must be >= 1");
    if (options.resolution < 1) throw InvalidArgument("resolution must be >= 1");
    Eigen::Vector3d look_at = Eigen::Vector3d::Zero();
    if (!video.cameras.cameras.empty()) {
        FrameViewSet axes;
        for (const auto& c : video.cameras.cameras) axes.views.push_back({c, {}});
        look_at = axes.look_at();
    }
    const Intrinsics in = Intrinsics::for_orbit(options.resolution, options.resolution, options.radius);
    return orbit_cameras(options.n_cameras, options.radius, options.elevation, look_at, in, options.azimuth_offset);
}

std::vector<std::vector<Image>> render_eval_videos(const Video3D& video, const EvalOptions& options) {
    const auto cams = eval_cameras(video, options);
    const std::size_t nf = video.clouds.size();
    std::vector<std::vector<Image>> out(cams.size(), std::vector<Image>(nf));
    tbb::parallel_for(std::size_t{0}, cams.size() * nf, [&](std::size_t i) {
        const std::size_t k = i / nf, f = i % nf;
        GaussianCloud cloud = video.clouds[f];
        out[k][f] = render(cloud, cams[k], options.render).image;
    });
    return out;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j{{"label", label},
                     {"clip_i", clip_i},
                     {"similarity", similarity},
                     {"embedder", embedder},
                     {"config", config},
                     {"config_hash", config_hash}};
    j["psnr"] = psnr ? nlohmann::json(*psnr) : nlohmann::json(nullptr);
    j["error"] = error ? nlohmann::json(*error) : nlohmann::json(nullptr);
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    r.label = j.value("label", "");
    r.clip_i = j.at("clip_i").get<double>();
    r.similarity = j.at("similarity").get<std::vector<std::vector<double>>>();
    r.embedder = j.value("embedder", "");
    r.config = j.value("config", nlohmann::json::object());
    r.config_hash = j.value("config_hash", "");
    if (j.contains("psnr") && !j["psnr"].is_null()) r.psnr = j["psnr"].get<double>();
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    return r;
}

double matrix_mean(const std::vector<std::vector<double>>& m) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& row : m) {
        for (double v : row) sum += v;
        count += row.size();
    }
    if (count == 0) throw InvalidArgument("empty similarity matrix");
    return sum / static_cast<double>(count);
}

namespace {

template <class E>
bool rethrow_as(const std::exception& e, const std::string& where) {
    if (dynamic_cast<const E*>(&e)) throw E(where + e.what());
    return false;
}

[[noreturn]] void rethrow_with_coordinates(const std::exception& e, const std::string& where) {
    rethrow_as<EmbedDimensionError>(e, where);
    rethrow_as<EmbedResponseError>(e, where);
    rethrow_as<EmbedConnectionError>(e, where);
    rethrow_as<EmbedError>(e, where);
    throw Error(where + e.what());
}

}  // namespace

EvalReport clip_i(const Image& reference, const std::vector<std::vector<Image>>& videos, Embedder& embedder) {
    if (videos.empty() || videos.front().empty()) throw InvalidArgument("clip_i needs at least one frame");
    Eigen::VectorXd ref;
    try {
        ref = embedder.embed(reference);
    } catch (const std::exception& e) {
        rethrow_with_coordinates(e, "reference image: ");
    }

    const std::size_t nv = videos.size();
    std::vector<std::vector<double>> sim(nv);
    std::vector<std::size_t> offsets{0};
    for (const auto& v : videos) {
        offsets.push_back(offsets.back() + v.size());
    }
    for (std::size_t k = 0; k < nv; ++k) sim[k].resize(videos[k].size());

    std::vector<std::string> errors(offsets.back());
    std::vector<std::exception_ptr> eptrs(offsets.back());
    tbb::parallel_for(std::size_t{0}, offsets.back(), [&](std::size_t i) {
        const std::size_t k = std::upper_bound(offsets.begin(), offsets.end(), i) - offsets.begin() - 1;
        const std::size_t f = i - offsets[k];
        try {
            const Eigen::VectorXd e = embedder.embed(videos[k][f]);
            if (e.size() != ref.size()) throw EmbedDimensionError("embedding dimension changed between calls");
            sim[k][f] = std::clamp(ref.dot(e), -1.0, 1.0);
        } catch (...) {
            eptrs[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < eptrs.size(); ++i) {
        if (!eptrs[i]) continue;
        const std::size_t k = std::upper_bound(offsets.begin(), offsets.end(), i) - offsets.begin() - 1;
        try {
            std::rethrow_exception(eptrs[i]);
        } catch (const std::exception& e) {
            rethrow_with_coordinates(e, "view " + std::to_string(k) + " frame " + std::to_string(i - offsets[k]) + ": ");
        }
    }

    EvalReport r;
    r.similarity = std::move(sim);
    r.clip_i = matrix_mean(r.similarity);
    r.embedder = embedder.id();
    return r;
}

double mean_psnr(const std::vector<std::vector<Image>>& rendered, const std::vector<std::vector<Image>>& ground_truth) {
    if (rendered.size() != ground_truth.size()) throw ShapeMismatch("view counts differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < rendered.size(); ++k) {
        if (rendered[k].size() != ground_truth[k].size()) throw ShapeMismatch("frame counts differ");
        for (std::size_t f = 0; f < rendered[k].size(); ++f) {
            sum += psnr(rendered[k][f], ground_truth[k][f]);
            ++n;
        }
    }
    if (n == 0) throw InvalidArgument("no frames to compare");
    return sum / static_cast<double>(n);
}

EvalReport evaluate_video(const Video3D& video, const Image& reference, Embedder& embedder,
                          const Video3D* ground_truth, const EvalOptions& options) {
    const auto videos = render_eval_videos(video, options);
    EvalReport r = clip_i(reference, videos, embedder);
    if (ground_truth) {
        Video3D gt;
        gt.cameras = video.cameras;
        for (int fi : video.frame_indices) {
            const auto it = std::find(ground_truth->frame_indices.begin(), ground_truth->frame_indices.end(), fi);
            if (it == ground_truth->frame_indices.end()) {
                throw InvalidArgument("ground truth has no frame " + std::to_string(fi));
            }
            gt.clouds.push_back(ground_truth->clouds[it - ground_truth->frame_indices.begin()]);
            gt.frame_indices.push_back(fi);
        }
        r.psnr = mean_psnr(videos, render_eval_videos(gt, options));
    }
    r.config = {{"eval", options.to_json()}, {"frames", video.frame_count()}};
    if (!video.provenance.config_hash.empty()) r.config["video_config_hash"] = video.provenance.config_hash;
    r.config_hash = config_hash(r.config);
    return r;
}

std::string format_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
    for (const auto& row : rows) {
        if (row.size() != headers.size()) throw InvalidArgument("table row has wrong number of cells");
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], std::max<std::size_t>(1, row[c].size()));
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = cells[c].empty() ? "-" : cells[c];
            if (c) out << " | ";
            out << cell;
            if (c + 1 < cells.size()) out << std::string(width[c] - cell.size(), ' ');
        }
        out << '\n';
    };
    line(headers);
    for (std::size_t c = 0; c < headers.size(); ++c) {
        if (c) out << "-|-";
        out << std::string(width[c], '-');
    }
    out << '\n';
    for (const auto& row : rows) line(row);
    return out.str();
}

std::string format_table(const std::string& key_header, const std::string& value_header,
                         const std::vector<std::pair<std::string, double>>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& [k, v] : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        cells.push_back({k, buf});
    }
    return format_table({key_header, value_header}, cells);
}

void AblationGrid::validate() const {
    if (views.empty()) throw InvalidArgument("ablation grid needs at least one view count");
    for (int v : views) {
        if (v < 1) throw InvalidArgument("view counts must be >= 1");
    }
    if (seeds.empty()) throw InvalidArgument("ablation grid needs at least one seed");
    if (max_frames < 0) throw InvalidArgument("max_frames must be >= 0");
    for (double m : motion) {
        if (!std::isfinite(m)) throw InvalidArgument("motion values must be finite");
    }
}

nlohmann::json AblationGrid::to_json() const {
    return {{"views", views}, {"motion", motion}, {"seeds", seeds},
            {"max_frames", max_frames}, {"optim", optim}, {"eval", eval.to_json()}};
}

AblationGrid AblationGrid::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("ablation grid must be a JSON object");
    AblationGrid g;
    try {
        g.views = j.value("views", std::vector<int>{});
        g.motion = j.value("motion", std::vector<double>{});
        g.seeds = j.value("seeds", std::vector<std::uint64_t>{0});
        g.max_frames = j.value("max_frames", 0);
        g.optim = j.value("optim", nlohmann::json::object());
        if (j.contains("eval")) g.eval = EvalOptions::from_json(j["eval"]);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad ablation grid: ") + e.what());
    }
    g.validate();
    return g;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::filesystem::path motion_dataset_path(const std::filesystem::path& root, double motion) {
    return root / ("motion_" + format_number(motion));
}

std::vector<int> decimate_views(int total, int n) {
    if (n < 1 || n > total) {
        throw InvalidArgument("cannot take " + std::to_string(n) + " views from " + std::to_string(total));
    }
    if (total % n != 0) {
        throw InvalidArgument(std::to_string(n) + " does not divide the " + std::to_string(total) + "-view orbit");
    }
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) idx.push_back(i * (total / n));
    return idx;
}

namespace {

OptimConfig apply_overrides(OptimConfig base, const nlohmann::json& overrides) {
    if (overrides.empty()) return base;
    nlohmann::json j = base.to_json();
    j.merge_patch(overrides);
    return OptimConfig::from_json(j);
}

}  // namespace

std::vector<EvalReport> ablate(const std::filesystem::path& dataset_root, const AblationGrid& grid,
                               const OptimConfig& config, Embedder& embedder, int workers) {
    grid.validate();
    const OptimConfig base = apply_overrides(config, grid.optim);
    std::vector<std::optional<double>> motions;
    if (grid.motion.empty()) motions.push_back(std::nullopt);
    for (double m : grid.motion) motions.push_back(m);

    std::vector<EvalReport> reports;
    for (const auto& motion : motions) {
        const auto root = motion ? motion_dataset_path(dataset_root, *motion) : dataset_root;
        std::optional<Dataset> ds;
        std::optional<Video3D> gt;
        std::string load_error;
        try {
            ds = ingest_dataset(root);
            if (std::filesystem::exists(ground_truth_path(root))) gt = load_video3d(ground_truth_path(root));
        } catch (const std::exception& e) {
            load_error = e.what();
        }

        for (int n_views : grid.views) {
            for (std::uint64_t seed : grid.seeds) {
                EvalReport r;
                r.config = {{"n_views", n_views}, {"seed", seed}, {"dataset", root.string()}};
                r.config["motion"] = motion ? nlohmann::json(*motion) : nlohmann::json(nullptr);
                if (ds && ds->seed.motion_score) r.config["motion_score"] = *ds->seed.motion_score;
                r.label = std::to_string(n_views) + " views" + (motion ? ", motion " + format_number(*motion) : "") +
                          ", seed " + std::to_string(seed);
                r.embedder = embedder.id();
                try {
                    if (!ds) throw IoError(load_error);
                    std::vector<FrameViewSet> sets;
                    const std::size_t nf = grid.max_frames > 0
                                                ? std::min<std::size_t>(grid.max_frames, ds->frames.size())
                                                : ds->frames.size();
                    for (std::size_t f = 0; f < nf; ++f) {
                        const int total = static_cast<int>(ds->frames[f].views.size());
                        sets.push_back(ds->frames[f].subset(decimate_views(total, n_views)));
                    }
                    OptimConfig cfg = base;
                    cfg.seed = seed;
                    cfg.background = ds->background;
                    PipelineOptions popts;
                    popts.workers = workers;
                    popts.run_config = {{"optim", cfg.to_json()}, {"n_views", n_views}};
                    auto rec = reconstruct_video(sets, cfg, popts);
                    if (!rec.ok()) {
                        throw Error("frame " + std::to_string(rec.failures.front().frame_index) + ": " +
                                    rec.failures.front().message);
                    }
                    EvalReport e = evaluate_video(rec.video, ds->seed.reference_image, embedder,
                                                  gt ? &*gt : nullptr, grid.eval);
                    r.clip_i = e.clip_i;
                    r.similarity = std::move(e.similarity);
                    r.psnr = e.psnr;
                    r.config["eval"] = grid.eval.to_json();
                    r.config["optim"] = cfg.to_json();
                    r.config["video_config_hash"] = rec.video.provenance.config_hash;
                } catch (const std::exception& e) {
                    r.error = e.what();
                }
                r.config_hash = config_hash(r.config);
                reports.push_back(std::move(r));
            }
        }
    }
    return reports;
}

std::string ablation_summary(const std::vector<EvalReport>& reports) {
    struct Acc {
        double clip = 0, psnr = 0;
        int n_clip = 0, n_psnr = 0, failed = 0;
    };
    // motion key: NaN sorts badly, so use (has_motion, value)
    std::map<std::tuple<int, int, double>, Acc> cells;
    bool any_motion = false;
    for (const auto& r : reports) {
        const int views = r.config.value("n_views", 0);
        const bool has_motion = r.config.contains("motion") && !r.config["motion"].is_null();
        any_motion |= has_motion;
        const double motion = has_motion ? r.config["motion"].get<double>() : 0.0;
        Acc& a = cells[{views, has_motion ? 1 : 0, motion}];
        if (r.error) {
            ++a.failed;
            continue;
        }
        a.clip += r.clip_i;
        ++a.n_clip;
        if (r.psnr) {
            a.psnr += *r.psnr;
            ++a.n_psnr;
        }
    }
    std::vector<std::string> headers{"Number of views"};
    if (any_motion) headers.push_back("Motion");
    headers.insert(headers.end(), {"CLIP-I", "PSNR", "Runs", "Failed"});
    std::vector<std::vector<std::string>> rows;
    char buf[32];
    for (const auto& [key, a] : cells) {
        std::vector<std::string> row{std::to_string(std::get<0>(key))};
        if (any_motion) row.push_back(std::get<1>(key) ? format_number(std::get<2>(key)) : "");
        if (a.n_clip) {
            std::snprintf(buf, sizeof buf, "%.4f", a.clip / a.n_clip);
            row.emplace_back(buf);
        } else {
            row.emplace_back();
        }
        if (a.n_psnr) {
            std::snprintf(buf, sizeof buf, "%.2f", a.psnr / a.n_psnr);
            row.emplace_back(buf);
        } else {
            row.emplace_back();
        }
        row.push_back(std::to_string(a.n_clip));
        row.push_back(std::to_string(a.failed));
        rows.push_back(std::move(row));
    }
    return format_table(headers, rows);
}

}  // namespace vid3d

#include "vid3d/pipeline.hpp"

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>

#include "vid3d/error.hpp"
#include "vid3d/hashing.hpp"

namespace vid3d {

VideoReconstruction reconstruct_video(const std::vector<FrameViewSet>& view_sets, const OptimConfig& config,
                                      const PipelineOptions& options) {
    config.validate();
    if (options.workers < 1) throw InvalidArgument("workers must be >= 1");
    const std::size_t n = view_sets.size();

    std::vector<GaussianCloud> clouds(n);
    std::vector<std::vector<StepRecord>> traces(n);
    std::vector<std::string> errors(n);
    std::vector<std::uint64_t> seeds(n);

    auto run_frame = [&](std::size_t i) {
        OptimConfig frame_cfg = config;
        frame_cfg.seed = derive_frame_seed(config.seed, view_sets[i].frame_index);
        seeds[i] = frame_cfg.seed;
        try {
            CheckpointHook hook;
            if (options.checkpoint && options.checkpoint_interval > 0) {
                hook.interval = options.checkpoint_interval;
                hook.fn = [&, fi = view_sets[i].frame_index](int step, const GaussianCloud& c) {
                    options.checkpoint(fi, step, c);
                };
            }
            FrameResult r = optimize_frame(view_sets[i], frame_cfg, hook);
            clouds[i] = std::move(r.cloud);
            traces[i] = std::move(r.trace);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (options.workers == 1) {
        for (std::size_t i = 0; i < n; ++i) run_frame(i);
    } else {
        tbb::global_control cap(tbb::global_control::max_allowed_parallelism,
                                std::max<std::size_t>(options.workers, tbb::global_control::active_value(
                                                                           tbb::global_control::max_allowed_parallelism)));
        tbb::task_arena arena(options.workers);
        arena.execute([&] {
            tbb::parallel_for(std::size_t{0}, n, std::size_t{1}, [&](std::size_t i) { run_frame(i); });
        });
    }

    VideoReconstruction out;
    out.video.clouds = std::move(clouds);
    out.traces = std::move(traces);
    for (std::size_t i = 0; i < n; ++i) {
        out.video.frame_indices.push_back(view_sets[i].frame_index);
        if (!errors[i].empty()) out.failures.push_back({view_sets[i].frame_index, errors[i]});
    }
    if (!view_sets.empty()) {
        for (const auto& v : view_sets.front().views) out.video.cameras.cameras.push_back(v.camera);
    }
    out.video.provenance.global_seed = config.seed;
    out.video.provenance.frame_seeds = seeds;
    out.video.provenance.config = options.run_config.empty() ? nlohmann::json{{"optim", config.to_json()}}
                                                             : options.run_config;
    out.video.provenance.config_hash = config_hash(out.video.provenance.config);
    return out;
}

}  // namespace vid3d

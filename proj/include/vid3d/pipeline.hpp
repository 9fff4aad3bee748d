#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vid3d/reconstruct.hpp"
#include "vid3d/video3d.hpp"

namespace vid3d {

struct FrameFailure {
    int frame_index = 0;
    std::string message;
};

struct VideoReconstruction {
    Video3D video;  // clouds of failed frames are left empty
    std::vector<std::vector<StepRecord>> traces;
    std::vector<FrameFailure> failures;

    bool ok() const { return failures.empty(); }
};

struct PipelineOptions {
    int workers = 1;  // frames optimized concurrently
    /// Stored verbatim in the output provenance and hashed; the caller decides
    /// what goes in (typically the fully resolved run config).
    nlohmann::json run_config = nlohmann::json::object();
    /// Called from worker threads every `checkpoint_interval` steps.
    int checkpoint_interval = 0;
    std::function<void(int frame_index, int step, const GaussianCloud&)> checkpoint;
};

/// Optimizes every view set independently. The cloud for a view set depends
/// only on (view set, config, derive_frame_seed(config.seed, frame_index)),
/// never on the other frames or on scheduling.
VideoReconstruction reconstruct_video(const std::vector<FrameViewSet>& view_sets, const OptimConfig& config,
                                      const PipelineOptions& options = {});

}  // namespace vid3d

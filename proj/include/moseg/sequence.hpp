#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moseg/grid.hpp"

namespace moseg {

// Reads a depth map from PFM (float) or 16-bit grayscale PNG. PNG values are
// mapped to png_value / 65535 * png_scale. Nonpositive values are clamped to
// kDepthFloor and counted in clamped_count.
DepthMap read_depth(const std::filesystem::path& path, DepthConvention convention,
                    double png_scale = 1.0);

MaskFrame read_masks(const std::filesystem::path& path);
void write_masks(const std::filesystem::path& path, const MaskFrame& frame);

// Ground-truth annotations carried by simulator-emitted manifests.
struct GroundTruthInfo {
    std::map<int, int> groups;  // track id -> motion group
    std::optional<int> background_group;
    std::vector<std::string> mask_paths;  // per-frame group-label masks
};

// All motion cues of one image sequence, loaded and validated.
struct Sequence {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::vector<int> track_ids;
    std::vector<MaskFrame> masks;    // frame_count
    std::vector<FlowField> flows;    // frame_count - 1, pair m spans frames m, m+1
    std::vector<DepthMap> depths;    // frame_count
    std::optional<GroundTruthInfo> gt;
};

struct Manifest {
    int version = 1;
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::vector<int> track_ids;
    DepthConvention depth_convention = DepthConvention::Depth;
    double depth_scale = 1.0;  // 16-bit PNG depth only
    std::vector<std::string> mask_paths;
    std::vector<std::string> flow_paths;
    std::vector<std::string> depth_paths;
    std::optional<GroundTruthInfo> gt;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

// Loads every cue file listed by the manifest and validates the sequence
// invariants (shared dimensions, flow count, mask labels in the registry).
Sequence load_sequence(const std::filesystem::path& manifest_path);

}  // namespace moseg

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "moseg/grid.hpp"

namespace moseg {

// One matched (pred, gt) region pair within a frame.
struct RegionMatch {
    uint16_t pred_label = 0;
    uint16_t gt_label = 0;
    double iou = 0.0;
    int64_t intersection = 0;
};

// Optimal one-to-one assignment between predicted (label > 0) and
// ground-truth (label > 0) regions maximizing total IoU. Pairs with zero
// IoU are left unmatched.
std::vector<RegionMatch> match_masks(const MaskFrame& pred, const MaskFrame& gt);

struct FrameScore {
    int frame = 0;
    double pu = 0.0;
    double ru = 0.0;
    double fu = 0.0;
    int64_t pred_pixels = 0;
    int64_t gt_pixels = 0;
    int64_t matched_pixels = 0;
};

struct EvalReport {
    double pu = 0.0;
    double ru = 0.0;
    double fu = 0.0;
    std::vector<FrameScore> frames;
};

// Matched-pixel precision/recall per frame under the optimal assignment;
// sequence scores average frames with nonempty ground truth. Frames with
// empty GT and empty prediction score 1/1.
EvalReport prf_metrics(const std::vector<MaskFrame>& pred, const std::vector<MaskFrame>& gt);

// Adjusted Rand index between two track -> group assignments over the same
// track set. Identical partitions give 1 even in degenerate cases.
double adjusted_rand(const std::map<int, int>& pred, const std::map<int, int>& gt);

void write_report(const std::filesystem::path& path, const EvalReport& report,
                  std::optional<double> ari = {});
void write_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace moseg

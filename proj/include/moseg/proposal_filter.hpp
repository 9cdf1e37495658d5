#pragma once

#include <vector>

#include "moseg/grid.hpp"
#include "moseg/sequence.hpp"

namespace moseg {

// Binary mask over the frame, one per proposal. Proposals may overlap here;
// a MaskFrame cannot represent overlap, so the suppression rule is defined
// at this level and the MaskFrame entry point reuses it.
struct BinaryMask {
    int track_id = 0;
    Grid<uint8_t> pixels;

    int64_t area() const {
        int64_t n = 0;
        for (uint8_t p : pixels.data) n += p != 0;
        return n;
    }
};

// |a ∩ b| / |a ∪ b|; 0 if both masks are empty.
double mask_iou(const Grid<uint8_t>& a, const Grid<uint8_t>& b);

struct FilterParams {
    double iou_threshold = 0.5;
    double max_area_fraction = 0.5;
};

// One-shot proposal suppression: oversized masks (area > fraction of the
// image) are dropped, and of any pair with IoU above the threshold the
// smaller-area proposal is dropped (equal area: higher track id). All
// decisions are taken against the input set, then applied at once.
// Returns the track ids that survive.
std::vector<int> suppress_proposals(const std::vector<BinaryMask>& proposals,
                                    const FilterParams& params = {});

// MaskFrame entry point: extracts per-track binary masks and applies
// suppress_proposals; removed tracks are zeroed. Idempotent.
MaskFrame filter_proposals(const MaskFrame& frame, const FilterParams& params = {});

// Per-(track, frame pair) visibility used for similarity normalization:
// a track is visible in pair m iff it has at least min_pixels in both
// frame m and frame m+1.
struct TrackTable {
    std::vector<int> track_ids;
    int pair_count = 0;
    std::vector<uint8_t> visible_;       // track-major [track][pair]
    std::vector<int64_t> pixel_counts_;  // track-major [track][frame]
    int frame_count = 0;

    bool visible(int track_index, int pair) const {
        return visible_[static_cast<size_t>(track_index) * pair_count + pair] != 0;
    }
    int64_t pixel_count(int track_index, int frame) const {
        return pixel_counts_[static_cast<size_t>(track_index) * frame_count + frame];
    }
    // Frame pairs in which both tracks are visible.
    int common_pairs(int track_a, int track_b) const {
        int n = 0;
        for (int m = 0; m < pair_count; ++m) n += visible(track_a, m) && visible(track_b, m);
        return n;
    }
};

TrackTable build_track_table(const Sequence& seq, int min_pixels);

}  // namespace moseg

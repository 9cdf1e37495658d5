#include "moseg/proposal_filter.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace moseg {

double mask_iou(const Grid<uint8_t>& a, const Grid<uint8_t>& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("mask_iou inputs differ in size");
    int64_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const bool pa = a.data[i] != 0, pb = b.data[i] != 0;
        inter += pa && pb;
        uni += pa || pb;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<int> suppress_proposals(const std::vector<BinaryMask>& proposals,
                                    const FilterParams& params) {
    const size_t n = proposals.size();
    std::vector<int64_t> areas(n);
    std::vector<bool> removed(n, false);

    int64_t image_area = 0;
    if (n > 0) image_area = static_cast<int64_t>(proposals[0].pixels.width) * proposals[0].pixels.height;

    for (size_t i = 0; i < n; ++i) {
        areas[i] = proposals[i].area();
        if (static_cast<double>(areas[i]) > params.max_area_fraction * static_cast<double>(image_area))
            removed[i] = true;
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (mask_iou(proposals[i].pixels, proposals[j].pixels) <= params.iou_threshold)
                continue;
            size_t loser;
            if (areas[i] != areas[j])
                loser = areas[i] < areas[j] ? i : j;
            else
                loser = proposals[i].track_id > proposals[j].track_id ? i : j;
            removed[loser] = true;
        }
    }

    std::vector<int> survivors;
    for (size_t i = 0; i < n; ++i)
        if (!removed[i]) survivors.push_back(proposals[i].track_id);
    return survivors;
}

MaskFrame filter_proposals(const MaskFrame& frame, const FilterParams& params) {
    std::set<int> labels;
    for (uint16_t l : frame.labels.data)
        if (l != 0) labels.insert(l);

    std::vector<BinaryMask> proposals;
    for (int label : labels) {
        BinaryMask mask;
        mask.track_id = label;
        mask.pixels = Grid<uint8_t>(frame.width(), frame.height());
        for (size_t i = 0; i < frame.labels.data.size(); ++i)
            mask.pixels.data[i] = frame.labels.data[i] == label;
        proposals.push_back(std::move(mask));
    }

    const std::vector<int> keep_list = suppress_proposals(proposals, params);
    const std::set<int> keep(keep_list.begin(), keep_list.end());

    MaskFrame out;
    out.labels = Grid<uint16_t>(frame.width(), frame.height());
    for (size_t i = 0; i < frame.labels.data.size(); ++i) {
        const uint16_t l = frame.labels.data[i];
        out.labels.data[i] = (l != 0 && keep.count(l)) ? l : 0;
    }
    return out;
}

TrackTable build_track_table(const Sequence& seq, int min_pixels) {
    TrackTable table;
    table.track_ids = seq.track_ids;
    table.frame_count = seq.frame_count;
    table.pair_count = seq.frame_count - 1;

    const size_t n_tracks = seq.track_ids.size();
    table.pixel_counts_.assign(n_tracks * static_cast<size_t>(seq.frame_count), 0);
    table.visible_.assign(n_tracks * static_cast<size_t>(table.pair_count), 0);

    std::map<int, int> index_of;
    for (size_t i = 0; i < n_tracks; ++i) index_of[seq.track_ids[i]] = static_cast<int>(i);

    for (int frame = 0; frame < seq.frame_count; ++frame) {
        for (uint16_t l : seq.masks[static_cast<size_t>(frame)].labels.data) {
            if (l == 0) continue;
            const auto it = index_of.find(l);
            if (it == index_of.end()) continue;
            ++table.pixel_counts_[static_cast<size_t>(it->second) * seq.frame_count + frame];
        }
    }
    for (size_t t = 0; t < n_tracks; ++t) {
        for (int m = 0; m < table.pair_count; ++m) {
            const bool vis = table.pixel_count(static_cast<int>(t), m) >= min_pixels &&
                             table.pixel_count(static_cast<int>(t), m + 1) >= min_pixels;
            table.visible_[t * static_cast<size_t>(table.pair_count) + m] = vis;
        }
    }
    return table;
}

}  // namespace moseg

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "moseg/affinity.hpp"
#include "moseg/sequence.hpp"

namespace moseg {

// Assignment of every clustered track to a motion group in {0..K-1}.
struct Labeling {
    std::vector<int> track_ids;
    std::vector<int> group_of;  // parallel to track_ids
    std::optional<int> background_group;

    int group(int track_id) const;
    std::map<int, int> as_map() const;
};

// Classical normalized spectral clustering: symmetric-normalized affinity,
// top-K eigenvectors, unit row normalization, seeded k-means (greedy
// farthest-point init, 10 restarts, 100 iterations, best inertia wins).
// Isolated objects (zero degree) keep zero embedding rows and share one
// cluster. Throws InvalidK unless 1 <= K <= N.
std::vector<int> spectral_cluster(const SimilarityMatrix& d, int k, uint64_t seed);

// Seeded k-means on row vectors; exposed for the clustering oracles.
std::vector<int> kmeans_rows(const std::vector<std::vector<double>>& rows, int k,
                             uint64_t seed, int restarts = 10, int max_iters = 100);

// Marks the group with the largest total mask area over the sequence as
// background (ties: lower group label). forced_track overrides by naming a
// track whose group becomes background.
Labeling assign_background(Labeling lab, const Sequence& seq,
                           std::optional<int> forced_track = {});

// Per-frame masks of emitted labels: background group and unassigned pixels
// become 0, moving groups get 1..M in ascending group order (or all 1 in
// binary mode). Also returns the group -> emitted label map.
struct RenderedSegmentation {
    std::vector<MaskFrame> frames;
    std::map<int, uint16_t> group_label;
};

RenderedSegmentation render_segmentation(const Labeling& lab, const Sequence& seq,
                                         bool binary = false);

}  // namespace moseg

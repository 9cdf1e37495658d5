#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "moseg/error.hpp"

namespace moseg {

// Cross-fit residuals for one frame pair over the objects visible in it.
// r(i, n) = mean squared error of object i's motion model evaluated on
// object n's pixel sample; the diagonal is the self-fit residual.
struct ResidualMatrix {
    int pair = 0;
    std::vector<int> object_indices;  // indices into the global track list
    std::vector<double> r;            // row-major V x V

    int count() const { return static_cast<int>(object_indices.size()); }
    double& at(int i, int n) { return r[static_cast<size_t>(i) * object_indices.size() + n]; }
    double at(int i, int n) const { return r[static_cast<size_t>(i) * object_indices.size() + n]; }
};

// Binary inlier vector of one object's residual row: exactly
// min(t, row length) bits set, on the smallest residuals, ties broken by
// lower index (stable order).
struct InlierVector {
    std::vector<uint8_t> bits;

    int set_count() const {
        int n = 0;
        for (uint8_t b : bits) n += b != 0;
        return n;
    }
};

InlierVector ork_inliers(const std::vector<double>& residual_row, int t);

// Dot product of two inlier vectors: the number of objects that are motion
// inliers to both models.
int vote_dot(const InlierVector& a, const InlierVector& b);

// Accumulated pairwise motion similarity. Per frame pair, the vote
// v_i . v_j is divided by the pair's effective inlier count so each common
// pair contributes at most 1; the normalized value divides by the number of
// common pairs, so d is in [0, 1] and symmetric.
struct SimilarityMatrix {
    int n = 0;
    std::vector<double> sum;  // accumulated capped votes
    std::vector<int> cnt;     // co-visibility counts
    std::vector<double> d;    // sum / cnt, 0 where cnt == 0

    double& sum_at(int i, int j) { return sum[static_cast<size_t>(i) * n + j]; }
    int& cnt_at(int i, int j) { return cnt[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return d[static_cast<size_t>(i) * n + j]; }
};

class SimilarityAccumulator {
public:
    explicit SimilarityAccumulator(int n_objects);

    // Adds one frame pair's inlier vectors. `object_indices[k]` is the
    // global object index of row k; `inliers[k]` is that object's vector
    // over the same compact index set.
    void add_pair(const std::vector<int>& object_indices,
                  const std::vector<InlierVector>& inliers);

    SimilarityMatrix finish() const;

private:
    SimilarityMatrix acc_;
};

// ORK threshold for one frame pair: max(1, round(fraction * visible)).
int ork_threshold(double fraction, int visible_count);

void dump_similarity(const std::filesystem::path& path, const SimilarityMatrix& sim,
                     const std::vector<int>& track_ids);

}  // namespace moseg

#include "moseg/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace moseg {

InlierVector ork_inliers(const std::vector<double>& residual_row, int t) {
    const int n = static_cast<int>(residual_row.size());
    if (n < 1) throw InvalidArgument("ork_inliers needs at least one residual");
    if (t < 1) throw InvalidArgument("ork threshold must be >= 1");
    for (double r : residual_row) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw InvalidArgument("residuals must be finite and nonnegative");
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return residual_row[static_cast<size_t>(a)] < residual_row[static_cast<size_t>(b)];
    });

    InlierVector v;
    v.bits.assign(static_cast<size_t>(n), 0);
    const int take = std::min(t, n);
    for (int k = 0; k < take; ++k) v.bits[static_cast<size_t>(order[static_cast<size_t>(k)])] = 1;
    return v;
}

int vote_dot(const InlierVector& a, const InlierVector& b) {
    if (a.bits.size() != b.bits.size())
        throw DimensionMismatch("inlier vectors differ in length");
    int dot = 0;
    for (size_t i = 0; i < a.bits.size(); ++i) dot += a.bits[i] && b.bits[i];
    return dot;
}

int ork_threshold(double fraction, int visible_count) {
    const int t = static_cast<int>(std::lround(fraction * visible_count));
    return std::max(1, std::min(t, std::max(visible_count, 1)));
}

SimilarityAccumulator::SimilarityAccumulator(int n_objects) {
    acc_.n = n_objects;
    acc_.sum.assign(static_cast<size_t>(n_objects) * n_objects, 0.0);
    acc_.cnt.assign(static_cast<size_t>(n_objects) * n_objects, 0);
}

void SimilarityAccumulator::add_pair(const std::vector<int>& object_indices,
                                     const std::vector<InlierVector>& inliers) {
    const size_t v = object_indices.size();
    if (inliers.size() != v)
        throw DimensionMismatch("one inlier vector per visible object expected");
    if (v == 0) return;

    // Every vector in a pair carries the same number of set bits; that count
    // is the effective t and caps each vote at 1.
    const int t_eff = inliers[0].set_count();
    for (const InlierVector& iv : inliers) {
        if (iv.bits.size() != v || iv.set_count() != t_eff)
            throw InvalidArgument("inconsistent inlier vectors for one frame pair");
    }
    if (t_eff < 1) return;

    for (size_t i = 0; i < v; ++i) {
        for (size_t j = i; j < v; ++j) {
            const double vote =
                static_cast<double>(vote_dot(inliers[i], inliers[j])) / t_eff;
            const int gi = object_indices[i], gj = object_indices[j];
            acc_.sum_at(gi, gj) += vote;
            acc_.cnt_at(gi, gj) += 1;
            if (gi != gj) {
                acc_.sum_at(gj, gi) += vote;
                acc_.cnt_at(gj, gi) += 1;
            }
        }
    }
}

SimilarityMatrix SimilarityAccumulator::finish() const {
    SimilarityMatrix out = acc_;
    out.d.assign(static_cast<size_t>(out.n) * out.n, 0.0);
    for (size_t i = 0; i < out.d.size(); ++i)
        out.d[i] = out.cnt[i] > 0 ? out.sum[i] / out.cnt[i] : 0.0;
    return out;
}

void dump_similarity(const std::filesystem::path& path, const SimilarityMatrix& sim,
                     const std::vector<int>& track_ids) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write similarity dump " + path.string());
    out << "# motion similarity matrix, row/col order matches track ids\n";
    out << "tracks";
    for (int id : track_ids) out << " " << id;
    out << "\n";
    out.precision(12);
    for (int i = 0; i < sim.n; ++i) {
        for (int j = 0; j < sim.n; ++j) out << (j ? " " : "") << sim.at(i, j);
        out << "\n";
    }
}

}  // namespace moseg

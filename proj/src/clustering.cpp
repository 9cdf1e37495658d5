#include "moseg/clustering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "moseg/rng.hpp"

namespace moseg {

int Labeling::group(int track_id) const {
    for (size_t i = 0; i < track_ids.size(); ++i)
        if (track_ids[i] == track_id) return group_of[i];
    throw UnknownTrackId("track " + std::to_string(track_id) + " is not in the labeling");
}

std::map<int, int> Labeling::as_map() const {
    std::map<int, int> m;
    for (size_t i = 0; i < track_ids.size(); ++i) m[track_ids[i]] = group_of[i];
    return m;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

struct KmeansRun {
    std::vector<int> assign;
    double inertia = std::numeric_limits<double>::infinity();
};

KmeansRun kmeans_once(const std::vector<std::vector<double>>& rows, int k, uint64_t seed,
                      int max_iters) {
    const int n = static_cast<int>(rows.size());
    const size_t dim = rows[0].size();
    Rng rng(seed);

    // Greedy farthest-point init: random first center, then repeatedly the
    // point farthest from its nearest chosen center (ties: lowest index).
    std::vector<std::vector<double>> centers;
    centers.push_back(rows[rng.next_below(static_cast<uint64_t>(n))]);
    std::vector<double> nearest(static_cast<size_t>(n), 0.0);
    while (static_cast<int>(centers.size()) < k) {
        int best = 0;
        double best_dist = -1.0;
        for (int i = 0; i < n; ++i) {
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) dmin = std::min(dmin, sq_dist(rows[static_cast<size_t>(i)], c));
            if (dmin > best_dist) {
                best_dist = dmin;
                best = i;
            }
        }
        centers.push_back(rows[static_cast<size_t>(best)]);
    }

    std::vector<int> assign(static_cast<size_t>(n), 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int arg = 0;
            double dmin = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(rows[static_cast<size_t>(i)], centers[static_cast<size_t>(c)]);
                if (d < dmin) {
                    dmin = d;
                    arg = c;
                }
            }
            if (assign[static_cast<size_t>(i)] != arg) {
                assign[static_cast<size_t>(i)] = arg;
                changed = true;
            }
        }

        std::vector<std::vector<double>> sums(static_cast<size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int c = assign[static_cast<size_t>(i)];
            ++counts[static_cast<size_t>(c)];
            for (size_t d = 0; d < dim; ++d) sums[static_cast<size_t>(c)][d] += rows[static_cast<size_t>(i)][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) {
                // Revive an empty cluster at the point farthest from its center.
                int far = 0;
                double fdist = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = sq_dist(rows[static_cast<size_t>(i)],
                                             centers[static_cast<size_t>(assign[static_cast<size_t>(i)])]);
                    if (d > fdist) {
                        fdist = d;
                        far = i;
                    }
                }
                centers[static_cast<size_t>(c)] = rows[static_cast<size_t>(far)];
                changed = true;
                continue;
            }
            for (size_t d = 0; d < dim; ++d)
                centers[static_cast<size_t>(c)][d] =
                    sums[static_cast<size_t>(c)][d] / counts[static_cast<size_t>(c)];
        }
        if (!changed) break;
    }

    KmeansRun run;
    run.assign = assign;
    run.inertia = 0.0;
    for (int i = 0; i < n; ++i)
        run.inertia += sq_dist(rows[static_cast<size_t>(i)],
                               centers[static_cast<size_t>(assign[static_cast<size_t>(i)])]);
    return run;
}

}  // namespace

std::vector<int> kmeans_rows(const std::vector<std::vector<double>>& rows, int k, uint64_t seed,
                             int restarts, int max_iters) {
    if (rows.empty()) throw InvalidArgument("kmeans needs at least one row");
    if (k < 1 || k > static_cast<int>(rows.size()))
        throw InvalidK("k must be in [1, n]");

    KmeansRun best;
    for (int r = 0; r < restarts; ++r) {
        KmeansRun run = kmeans_once(rows, k, mix_seed(seed, static_cast<uint64_t>(r)), max_iters);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best.assign;
}

std::vector<int> spectral_cluster(const SimilarityMatrix& d, int k, uint64_t seed) {
    const int n = d.n;
    if (k < 1 || k > n) throw InvalidK("K = " + std::to_string(k) + " with N = " + std::to_string(n));

    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = d.at(i, j);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidArgument("similarity entries must be finite and nonnegative");
            w(i, j) = v;
        }
    }
    if (!w.isApprox(w.transpose(), 1e-12))
        throw InvalidArgument("similarity matrix must be symmetric");

    Eigen::VectorXd deg = w.rowwise().sum();
    for (int i = 0; i < n; ++i)
        if (deg(i) <= 0.0) deg(i) = 1.0;  // isolated rows
    const Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();
    const Eigen::MatrixXd a_norm = dinv_sqrt.asDiagonal() * w * dinv_sqrt.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a_norm + a_norm.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");

    // Eigenvalues ascend; the top-K eigenvectors form the embedding.
    std::vector<std::vector<double>> rows(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(k), 0.0));
    for (int i = 0; i < n; ++i) {
        double norm_sq = 0.0;
        for (int c = 0; c < k; ++c) {
            const double v = eig.eigenvectors()(i, n - 1 - c);
            rows[static_cast<size_t>(i)][static_cast<size_t>(c)] = v;
            norm_sq += v * v;
        }
        if (norm_sq > 0.0) {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (double& v : rows[static_cast<size_t>(i)]) v *= inv;
        }
    }

    return kmeans_rows(rows, k, seed);
}

Labeling assign_background(Labeling lab, const Sequence& seq, std::optional<int> forced_track) {
    if (forced_track) {
        lab.background_group = lab.group(*forced_track);
        return lab;
    }

    std::map<int, int64_t> group_area;
    for (size_t i = 0; i < lab.track_ids.size(); ++i) group_area[lab.group_of[i]] = 0;

    std::map<int, int> group_of_track;
    for (size_t i = 0; i < lab.track_ids.size(); ++i) group_of_track[lab.track_ids[i]] = lab.group_of[i];

    for (const MaskFrame& frame : seq.masks) {
        for (uint16_t l : frame.labels.data) {
            if (l == 0) continue;
            const auto it = group_of_track.find(l);
            if (it != group_of_track.end()) ++group_area[it->second];
        }
    }

    int best_group = -1;
    int64_t best_area = -1;
    for (const auto& [group, area] : group_area) {
        if (area > best_area) {  // map iterates ascending, so ties keep the lower label
            best_area = area;
            best_group = group;
        }
    }
    if (best_group >= 0) lab.background_group = best_group;
    return lab;
}

RenderedSegmentation render_segmentation(const Labeling& lab, const Sequence& seq, bool binary) {
    RenderedSegmentation out;

    std::set<int> groups(lab.group_of.begin(), lab.group_of.end());
    uint16_t next = 1;
    for (int g : groups) {
        const bool is_bg = lab.background_group && g == *lab.background_group;
        out.group_label[g] = is_bg ? 0 : (binary ? 1 : next++);
    }

    std::map<int, uint16_t> label_of_track;
    for (size_t i = 0; i < lab.track_ids.size(); ++i)
        label_of_track[lab.track_ids[i]] = out.group_label.at(lab.group_of[i]);

    for (const MaskFrame& frame : seq.masks) {
        MaskFrame rendered;
        rendered.labels = Grid<uint16_t>(frame.width(), frame.height());
        for (size_t i = 0; i < frame.labels.data.size(); ++i) {
            const uint16_t track = frame.labels.data[i];
            if (track == 0) continue;
            const auto it = label_of_track.find(track);
            rendered.labels.data[i] = it == label_of_track.end() ? 0 : it->second;
        }
        out.frames.push_back(std::move(rendered));
    }
    return out;
}

}  // namespace moseg

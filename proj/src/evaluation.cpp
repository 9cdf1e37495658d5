#include "moseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "moseg/error.hpp"

namespace moseg {

namespace {

// Hungarian algorithm (Jonker-Volgenant potentials form), minimizing cost
// over an n x m matrix with n <= m. Returns per-row assigned column.
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m = static_cast<int>(cost[0].size());

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(m) + 1, inf);
        std::vector<char> used(static_cast<size_t>(m) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            const int i0 = p[static_cast<size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(static_cast<size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[static_cast<size_t>(j)] > 0) row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

std::vector<uint16_t> labels_of(const MaskFrame& frame) {
    std::set<uint16_t> s;
    for (uint16_t l : frame.labels.data)
        if (l != 0) s.insert(l);
    return {s.begin(), s.end()};
}

}  // namespace

std::vector<RegionMatch> match_masks(const MaskFrame& pred, const MaskFrame& gt) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionMismatch("predicted and ground-truth masks differ in size");

    const std::vector<uint16_t> pred_labels = labels_of(pred);
    const std::vector<uint16_t> gt_labels = labels_of(gt);
    if (pred_labels.empty() || gt_labels.empty()) return {};

    std::map<uint16_t, int> pred_index, gt_index;
    for (size_t i = 0; i < pred_labels.size(); ++i) pred_index[pred_labels[i]] = static_cast<int>(i);
    for (size_t i = 0; i < gt_labels.size(); ++i) gt_index[gt_labels[i]] = static_cast<int>(i);

    std::vector<int64_t> pred_area(pred_labels.size(), 0), gt_area(gt_labels.size(), 0);
    std::vector<std::vector<int64_t>> inter(pred_labels.size(),
                                            std::vector<int64_t>(gt_labels.size(), 0));
    for (size_t i = 0; i < pred.labels.data.size(); ++i) {
        const uint16_t pl = pred.labels.data[i], gl = gt.labels.data[i];
        if (pl != 0) ++pred_area[static_cast<size_t>(pred_index[pl])];
        if (gl != 0) ++gt_area[static_cast<size_t>(gt_index[gl])];
        if (pl != 0 && gl != 0)
            ++inter[static_cast<size_t>(pred_index[pl])][static_cast<size_t>(gt_index[gl])];
    }

    // Maximize total IoU = minimize negated IoU; pad so rows <= cols.
    const size_t np = pred_labels.size(), ng = gt_labels.size();
    const bool pred_rows = np <= ng;
    const size_t rows = pred_rows ? np : ng, cols = pred_rows ? ng : np;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, 0.0));
    for (size_t a = 0; a < rows; ++a) {
        for (size_t b = 0; b < cols; ++b) {
            const size_t pi = pred_rows ? a : b;
            const size_t gi = pred_rows ? b : a;
            const int64_t is = inter[pi][gi];
            const int64_t un = pred_area[pi] + gt_area[gi] - is;
            cost[a][b] = un > 0 ? -static_cast<double>(is) / static_cast<double>(un) : 0.0;
        }
    }
    const std::vector<int> assign = hungarian_min(cost);

    std::vector<RegionMatch> matches;
    for (size_t a = 0; a < rows; ++a) {
        if (assign[a] < 0) continue;
        const size_t b = static_cast<size_t>(assign[a]);
        const size_t pi = pred_rows ? a : b;
        const size_t gi = pred_rows ? b : a;
        const double iou = -cost[a][b];
        if (iou <= 0.0) continue;  // zero-overlap pairs stay unmatched
        RegionMatch match;
        match.pred_label = pred_labels[pi];
        match.gt_label = gt_labels[gi];
        match.iou = iou;
        match.intersection = inter[pi][gi];
        matches.push_back(match);
    }
    return matches;
}

EvalReport prf_metrics(const std::vector<MaskFrame>& pred, const std::vector<MaskFrame>& gt) {
    if (pred.size() != gt.size())
        throw DimensionMismatch("prediction and ground truth differ in frame count (" +
                                std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) + ")");

    EvalReport report;
    double pu_sum = 0.0, ru_sum = 0.0;
    int scored_frames = 0;

    for (size_t f = 0; f < pred.size(); ++f) {
        FrameScore score;
        score.frame = static_cast<int>(f);
        for (uint16_t l : pred[f].labels.data) score.pred_pixels += l != 0;
        for (uint16_t l : gt[f].labels.data) score.gt_pixels += l != 0;

        for (const RegionMatch& m : match_masks(pred[f], gt[f]))
            score.matched_pixels += m.intersection;

        if (score.gt_pixels == 0) {
            score.pu = score.pred_pixels == 0 ? 1.0 : 0.0;
            score.ru = 1.0;
        } else {
            score.pu = score.pred_pixels > 0
                           ? static_cast<double>(score.matched_pixels) / static_cast<double>(score.pred_pixels)
                           : 0.0;
            score.ru = static_cast<double>(score.matched_pixels) / static_cast<double>(score.gt_pixels);
            pu_sum += score.pu;
            ru_sum += score.ru;
            ++scored_frames;
        }
        score.fu = score.pu + score.ru > 0.0 ? 2.0 * score.pu * score.ru / (score.pu + score.ru) : 0.0;
        report.frames.push_back(score);
    }

    if (scored_frames > 0) {
        report.pu = pu_sum / scored_frames;
        report.ru = ru_sum / scored_frames;
    }
    report.fu = report.pu + report.ru > 0.0
                    ? 2.0 * report.pu * report.ru / (report.pu + report.ru)
                    : 0.0;
    return report;
}

double adjusted_rand(const std::map<int, int>& pred, const std::map<int, int>& gt) {
    if (pred.size() != gt.size())
        throw TrackSetMismatch("labelings cover different numbers of tracks");
    for (const auto& [track, group] : pred) {
        (void)group;
        if (!gt.count(track))
            throw TrackSetMismatch("track " + std::to_string(track) + " missing from ground truth");
    }

    // Contingency table.
    std::map<std::pair<int, int>, int64_t> cells;
    std::map<int, int64_t> row_sums, col_sums;
    for (const auto& [track, pg] : pred) {
        const int gg = gt.at(track);
        ++cells[{pg, gg}];
        ++row_sums[pg];
        ++col_sums[gg];
    }

    auto choose2 = [](int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); };

    double index = 0.0, rows = 0.0, cols = 0.0;
    for (const auto& [cell, count] : cells) index += choose2(count);
    for (const auto& [g, count] : row_sums) rows += choose2(count);
    for (const auto& [g, count] : col_sums) cols += choose2(count);

    const double total_pairs = choose2(static_cast<int64_t>(pred.size()));

    // Identical partitions are a perfect score even where the general
    // formula degenerates (e.g. both one group).
    const bool identical = [&] {
        if (row_sums.size() != col_sums.size()) return false;
        for (const auto& [cell, count] : cells) {
            if (count != row_sums.at(cell.first) || count != col_sums.at(cell.second)) return false;
        }
        return true;
    }();
    if (identical) return 1.0;

    if (total_pairs <= 0.0) return 1.0;  // single track: trivially identical
    const double expected = rows * cols / total_pairs;
    const double max_index = 0.5 * (rows + cols);
    const double denom = max_index - expected;
    if (denom == 0.0) return 0.0;
    return (index - expected) / denom;
}

void write_report(const std::filesystem::path& path, const EvalReport& report,
                  std::optional<double> ari) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write report " + path.string());
    out.precision(6);
    out << std::fixed;
    out << "sequence Pu " << report.pu << "\n";
    out << "sequence Ru " << report.ru << "\n";
    out << "sequence Fu " << report.fu << "\n";
    if (ari) out << "object ARI " << *ari << "\n";
    out << "frames " << report.frames.size() << "\n";
}

void write_csv(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write csv " + path.string());
    out << "frame,pu,ru,fu,pred_pixels,gt_pixels,matched_pixels\n";
    out.precision(9);
    for (const FrameScore& s : report.frames) {
        out << s.frame << "," << s.pu << "," << s.ru << "," << s.fu << "," << s.pred_pixels << ","
            << s.gt_pixels << "," << s.matched_pixels << "\n";
    }
}

}  // namespace moseg

#include "moseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "moseg/evaluation.hpp"
#include "moseg/flow_io.hpp"
#include "moseg/rng.hpp"
#include "moseg/visualize.hpp"

namespace moseg {

using nlohmann::json;

int worker_threads() {
    if (const char* env = std::getenv("MOSEG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

namespace {

// Runs body(i) for i in [0, count) across the worker pool. Each index is
// independent, so scheduling cannot affect results.
void parallel_for(int count, const std::function<void(int)>& body) {
    const int threads = std::min(worker_threads(), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct PairFits {
    std::vector<int> visible;  // indices into clustered track list
    std::vector<PixelSample> samples;
    std::vector<LinearMotionModel> linear;
    std::vector<QuadraticMotionModel> quadratic;
};

std::string frame_file(const std::string& prefix, int index, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return prefix + buf + ext;
}

}  // namespace

SegmentationResult run_segmentation(const Sequence& seq, const SegmentConfig& config) {
    if (config.num_motions < 1) throw InvalidK("--num-motions must be >= 1");
    if (config.ork_fraction <= 0.0 || config.ork_fraction > 1.0)
        throw InvalidArgument("--ork-fraction must be in (0, 1]");

    SegmentationResult result;
    result.filtered = seq;
    const FilterParams filter_params{config.iou_threshold, config.max_area_fraction};
    for (MaskFrame& frame : result.filtered.masks) frame = filter_proposals(frame, filter_params);

    const Sequence& fseq = result.filtered;
    const TrackTable table = build_track_table(fseq, config.min_pixels);

    if (config.ablation == AblationMode::ProposalsBaseline) {
        // Every surviving proposal is its own moving group; no model fitting.
        std::vector<int64_t> areas(fseq.track_ids.size(), 0);
        for (const MaskFrame& frame : fseq.masks)
            for (uint16_t l : frame.labels.data)
                if (l != 0)
                    for (size_t t = 0; t < fseq.track_ids.size(); ++t)
                        if (fseq.track_ids[t] == l) ++areas[t];
        for (size_t t = 0; t < fseq.track_ids.size(); ++t) {
            if (areas[t] == 0) continue;
            result.labeling.track_ids.push_back(fseq.track_ids[t]);
            result.labeling.group_of.push_back(static_cast<int>(result.labeling.group_of.size()));
        }
        result.clustered_tracks = result.labeling.track_ids;
        result.similarity.n = 0;
        result.rendered = render_segmentation(result.labeling, fseq, config.binary);
        return result;
    }

    // Tracks that can be fitted in at least one frame pair.
    std::vector<int> clustered;  // indices into fseq.track_ids
    for (size_t t = 0; t < fseq.track_ids.size(); ++t) {
        for (int m = 0; m < table.pair_count; ++m) {
            if (table.visible(static_cast<int>(t), m)) {
                clustered.push_back(static_cast<int>(t));
                break;
            }
        }
    }
    if (clustered.empty())
        throw InsufficientData("no track passes the visibility quorum in any frame pair");
    std::vector<int> cluster_index(fseq.track_ids.size(), -1);
    for (size_t i = 0; i < clustered.size(); ++i) cluster_index[static_cast<size_t>(clustered[i])] = static_cast<int>(i);

    const int n_objects = static_cast<int>(clustered.size());
    if (config.num_motions > n_objects)
        throw InvalidK("--num-motions " + std::to_string(config.num_motions) + " exceeds the " +
                       std::to_string(n_objects) + " clusterable tracks");

    const CoordGrid grid = normalize_coords(fseq.width, fseq.height);
    std::vector<InverseDepthMap> inv_depths;
    inv_depths.reserve(static_cast<size_t>(fseq.frame_count));
    for (const DepthMap& d : fseq.depths) inv_depths.push_back(to_inverse_depth(d));

    const bool use_quadratic =
        config.model == MotionModelKind::Quadratic || config.ablation == AblationMode::FlowOnly;

    // Fit one model per visible object per frame pair.
    std::vector<PairFits> fits(static_cast<size_t>(table.pair_count));
    parallel_for(table.pair_count, [&](int m) {
        PairFits& pf = fits[static_cast<size_t>(m)];
        for (int i = 0; i < n_objects; ++i) {
            const int t = clustered[static_cast<size_t>(i)];
            if (!table.visible(t, m)) continue;
            const int track_id = fseq.track_ids[static_cast<size_t>(t)];
            PixelSample sample = sample_pixels(
                fseq.masks[static_cast<size_t>(m)], fseq.flows[static_cast<size_t>(m)],
                inv_depths[static_cast<size_t>(m)], grid, track_id, config.max_samples,
                mix_seed(config.seed, static_cast<uint64_t>(track_id), static_cast<uint64_t>(m)));
            pf.visible.push_back(i);
            if (use_quadratic) {
                pf.quadratic.push_back(fit_quadratic_model(sample));
                pf.linear.emplace_back();
            } else {
                pf.linear.push_back(fit_linear_model(sample, config.linear_form));
                pf.quadratic.emplace_back();
            }
            pf.samples.push_back(std::move(sample));
        }
    });

    // Cross-fit residuals -> ORK votes -> similarity.
    SimilarityAccumulator accumulator(n_objects);
    for (int m = 0; m < table.pair_count; ++m) {
        const PairFits& pf = fits[static_cast<size_t>(m)];
        const int v = static_cast<int>(pf.visible.size());
        if (v == 0) continue;
        ResidualMatrix residuals;
        residuals.pair = m;
        residuals.object_indices = pf.visible;
        residuals.r.assign(static_cast<size_t>(v) * v, 0.0);
        for (int i = 0; i < v; ++i) {
            for (int n = 0; n < v; ++n) {
                residuals.at(i, n) =
                    use_quadratic
                        ? model_residual(pf.quadratic[static_cast<size_t>(i)], pf.samples[static_cast<size_t>(n)])
                        : model_residual(pf.linear[static_cast<size_t>(i)], pf.samples[static_cast<size_t>(n)]);
            }
        }
        const int t_m = ork_threshold(config.ork_fraction, v);
        std::vector<InlierVector> inliers;
        inliers.reserve(static_cast<size_t>(v));
        for (int i = 0; i < v; ++i) {
            std::vector<double> row(static_cast<size_t>(v));
            for (int n = 0; n < v; ++n) row[static_cast<size_t>(n)] = residuals.at(i, n);
            inliers.push_back(ork_inliers(row, t_m));
        }
        accumulator.add_pair(pf.visible, inliers);
    }
    result.similarity = accumulator.finish();

    const std::vector<int> groups =
        spectral_cluster(result.similarity, config.num_motions, mix_seed(config.seed, 0x6b6d65616e73ull));

    result.labeling.track_ids.reserve(static_cast<size_t>(n_objects));
    for (int i = 0; i < n_objects; ++i)
        result.labeling.track_ids.push_back(fseq.track_ids[static_cast<size_t>(clustered[static_cast<size_t>(i)])]);
    result.labeling.group_of = groups;
    result.clustered_tracks = result.labeling.track_ids;

    result.labeling = assign_background(result.labeling, fseq, config.background_track);
    result.rendered = render_segmentation(result.labeling, fseq, config.binary);
    return result;
}

int cmd_segment(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                const SegmentConfig& config,
                const std::optional<std::filesystem::path>& dump_affinity) {
    const Sequence seq = load_sequence(manifest);
    const SegmentationResult result = run_segmentation(seq, config);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir / "masks", ec);
    if (ec) throw IoFailure("cannot create output directory " + out_dir.string());

    json labels;
    json tracks = json::object();
    for (size_t i = 0; i < result.labeling.track_ids.size(); ++i)
        tracks[std::to_string(result.labeling.track_ids[i])] = result.labeling.group_of[i];
    labels["tracks"] = tracks;
    if (result.labeling.background_group)
        labels["background_group"] = *result.labeling.background_group;
    else
        labels["background_group"] = nullptr;
    json group_label = json::object();
    for (const auto& [group, label] : result.rendered.group_label)
        group_label[std::to_string(group)] = label;
    labels["group_label"] = group_label;
    labels["num_motions"] = config.num_motions;

    json mask_list = json::array();
    for (size_t f = 0; f < result.rendered.frames.size(); ++f) {
        const std::string rel = frame_file("masks/frame_", static_cast<int>(f), ".png");
        write_masks(out_dir / rel, result.rendered.frames[f]);
        mask_list.push_back(rel);
    }
    labels["masks"] = mask_list;

    std::ofstream out(out_dir / "labels.json", std::ios::trunc);
    if (!out) throw IoFailure("cannot write labels.json under " + out_dir.string());
    out << labels.dump(2) << "\n";

    if (dump_affinity && result.similarity.n > 0)
        dump_similarity(*dump_affinity, result.similarity, result.clustered_tracks);

    std::cout << "segmented " << result.labeling.track_ids.size() << " tracks into "
              << (config.ablation == AblationMode::ProposalsBaseline
                      ? result.labeling.track_ids.size()
                      : static_cast<size_t>(config.num_motions))
              << " groups -> " << (out_dir / "labels.json").string() << "\n";
    return 0;
}

int cmd_simulate(const SimulateOptions& options, const std::filesystem::path& out_dir) {
    if (!options.preset == !options.scene_path)
        throw InvalidArgument("provide exactly one of --preset and --spec");
    const SceneSpec spec = options.preset ? make_preset(*options.preset)
                                          : read_scene_spec(*options.scene_path);
    const std::filesystem::path manifest =
        emit_sequence(spec, out_dir, options.noise, options.seed);
    std::cout << "wrote " << manifest.string() << "\n";
    return 0;
}

namespace {

std::vector<std::filesystem::path> collect_mask_files(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    auto list_pngs = [](const fs::path& d) {
        std::vector<fs::path> files;
        if (fs::is_directory(d)) {
            for (const auto& entry : fs::directory_iterator(d)) {
                if (entry.is_regular_file() && entry.path().extension() == ".png")
                    files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        return files;
    };

    std::vector<fs::path> files = list_pngs(dir);
    if (files.empty()) files = list_pngs(dir / "masks");
    if (files.empty()) files = list_pngs(dir / "gt");
    if (files.empty()) throw MissingFile("no .png masks under " + dir.string());
    return files;
}

std::optional<double> try_ari(const std::filesystem::path& pred_dir,
                              const std::filesystem::path& gt_dir) {
    namespace fs = std::filesystem;
    const fs::path labels_path = pred_dir / "labels.json";
    fs::path manifest_path = gt_dir / "manifest.json";
    if (!fs::exists(manifest_path)) manifest_path = gt_dir.parent_path() / "manifest.json";
    if (!fs::exists(labels_path) || !fs::exists(manifest_path)) return {};

    std::ifstream in(labels_path);
    json j;
    in >> j;
    std::map<int, int> pred;
    for (const auto& [track, group] : j.at("tracks").items())
        pred[std::stoi(track)] = group.get<int>();

    const Manifest manifest = read_manifest(manifest_path);
    if (!manifest.gt) return {};
    std::map<int, int> gt;
    for (const auto& [track, group] : manifest.gt->groups) {
        if (pred.count(track)) gt[track] = group;
    }
    if (gt.size() != pred.size() || pred.empty()) return {};
    return adjusted_rand(pred, gt);
}

}  // namespace

int cmd_evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                 const std::optional<std::filesystem::path>& report_path,
                 const std::optional<std::filesystem::path>& csv_path) {
    const auto pred_files = collect_mask_files(pred_dir);
    const auto gt_files = collect_mask_files(gt_dir);
    if (pred_files.size() != gt_files.size())
        throw DimensionMismatch("prediction has " + std::to_string(pred_files.size()) +
                                " frames, ground truth has " + std::to_string(gt_files.size()));

    std::vector<MaskFrame> pred, gt;
    for (const auto& p : pred_files) pred.push_back(read_masks(p));
    for (const auto& p : gt_files) gt.push_back(read_masks(p));

    const EvalReport report = prf_metrics(pred, gt);
    const std::optional<double> ari = try_ari(pred_dir, gt_dir);

    std::cout.precision(6);
    std::cout << std::fixed;
    std::cout << "Pu " << report.pu << "\nRu " << report.ru << "\nFu " << report.fu << "\n";
    if (ari) std::cout << "ARI " << *ari << "\n";

    if (report_path) write_report(*report_path, report, ari);
    if (csv_path) write_csv(*csv_path, report);
    return 0;
}

int cmd_visualize(const std::filesystem::path& mask_dir,
                  const std::optional<std::filesystem::path>& flow_dir,
                  const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoFailure("cannot create output directory " + out_dir.string());

    const auto masks = collect_mask_files(mask_dir);
    for (size_t i = 0; i < masks.size(); ++i) {
        const MaskFrame mask = read_masks(masks[i]);
        write_png_rgb8(out_dir / frame_file("overlay_", static_cast<int>(i), ".png"),
                       render_overlay(mask));
    }

    if (flow_dir) {
        std::vector<fs::path> flows;
        for (const auto& entry : fs::directory_iterator(*flow_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".flo")
                flows.push_back(entry.path());
        }
        std::sort(flows.begin(), flows.end());
        for (size_t i = 0; i < flows.size(); ++i) {
            write_png_rgb8(out_dir / frame_file("flow_", static_cast<int>(i), ".png"),
                           render_flow_wheel(read_flow(flows[i])));
        }
    }
    std::cout << "wrote visualizations to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace moseg

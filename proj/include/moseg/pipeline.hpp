#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "moseg/clustering.hpp"
#include "moseg/motion_model.hpp"
#include "moseg/proposal_filter.hpp"
#include "moseg/synthetic.hpp"

namespace moseg {

enum class MotionModelKind { LinearDepth, Quadratic };
enum class AblationMode { Full, FlowOnly, ProposalsBaseline };

struct SegmentConfig {
    int num_motions = 1;
    MotionModelKind model = MotionModelKind::LinearDepth;
    LinearModelForm linear_form = LinearModelForm::Derived;
    AblationMode ablation = AblationMode::Full;
    double iou_threshold = 0.5;
    double max_area_fraction = 0.5;
    int min_pixels = 50;
    double ork_fraction = 0.25;
    int max_samples = kDefaultMaxSamples;
    uint64_t seed = 1;
    bool binary = false;
    std::optional<int> background_track;
};

struct SegmentationResult {
    Labeling labeling;
    SimilarityMatrix similarity;
    std::vector<int> clustered_tracks;   // tracks that survived filtering
    RenderedSegmentation rendered;
    Sequence filtered;                   // sequence with filtered masks
};

// The full engine on an in-memory sequence: filter proposals, fit a motion
// model per (object, frame pair), cross-evaluate residuals, ORK inlier
// votes, accumulate the similarity matrix, spectrally cluster, render
// group masks. ProposalsBaseline skips fitting and clustering and emits
// each surviving proposal as its own moving group.
SegmentationResult run_segmentation(const Sequence& seq, const SegmentConfig& config);

// Number of worker threads for per-frame-pair fitting; reads MOSEG_THREADS.
int worker_threads();

// Subcommand bodies shared between the CLI and the acceptance suite.
int cmd_segment(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                const SegmentConfig& config,
                const std::optional<std::filesystem::path>& dump_affinity = {});

struct SimulateOptions {
    std::optional<std::string> preset;
    std::optional<std::filesystem::path> scene_path;
    NoiseSpec noise;
    uint64_t seed = 1;
};

int cmd_simulate(const SimulateOptions& options, const std::filesystem::path& out_dir);

int cmd_evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                 const std::optional<std::filesystem::path>& report_path,
                 const std::optional<std::filesystem::path>& csv_path);

int cmd_visualize(const std::filesystem::path& mask_dir,
                  const std::optional<std::filesystem::path>& flow_dir,
                  const std::filesystem::path& out_dir);

}  // namespace moseg

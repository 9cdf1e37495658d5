#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "moseg/pipeline.hpp"

namespace {

moseg::MotionModelKind parse_model(const std::string& name) {
    if (name == "linear-depth") return moseg::MotionModelKind::LinearDepth;
    if (name == "quadratic") return moseg::MotionModelKind::Quadratic;
    throw moseg::InvalidArgument("--motion-model must be linear-depth|quadratic");
}

moseg::AblationMode parse_ablation(const std::string& name) {
    if (name == "full") return moseg::AblationMode::Full;
    if (name == "flow-only") return moseg::AblationMode::FlowOnly;
    if (name == "proposals-baseline") return moseg::AblationMode::ProposalsBaseline;
    throw moseg::InvalidArgument("--ablation must be full|flow-only|proposals-baseline");
}

moseg::LinearModelForm parse_form(const std::string& name) {
    if (name == "derived") return moseg::LinearModelForm::Derived;
    if (name == "printed") return moseg::LinearModelForm::Printed;
    throw moseg::InvalidArgument("--linear-form must be derived|printed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free motion segmentation from tracked proposals, optical flow and relative depth"};
    app.require_subcommand(1);

    // segment
    auto* segment = app.add_subcommand("segment", "Cluster tracked proposals into motion groups");
    std::string manifest, seg_out, model = "linear-depth", ablation = "full", form = "derived";
    std::string affinity_dump;
    moseg::SegmentConfig config;
    int background_track = -1;
    segment->add_option("--manifest", manifest, "Sequence manifest (JSON)")->required();
    segment->add_option("--out", seg_out, "Output directory")->required();
    segment->add_option("--num-motions", config.num_motions, "Number of motion groups K")->required();
    segment->add_option("--motion-model", model, "linear-depth|quadratic");
    segment->add_option("--ablation", ablation, "full|flow-only|proposals-baseline");
    segment->add_option("--linear-form", form, "derived|printed variant of the linear model");
    segment->add_option("--iou-threshold", config.iou_threshold, "Proposal suppression IoU");
    segment->add_option("--max-area-fraction", config.max_area_fraction, "Oversize-mask cutoff");
    segment->add_option("--min-pixels", config.min_pixels, "Visibility quorum per frame");
    segment->add_option("--ork-fraction", config.ork_fraction, "Inlier threshold t as a fraction of visible objects");
    segment->add_option("--max-samples", config.max_samples, "Pixel subsample cap per object per pair");
    segment->add_option("--seed", config.seed, "Root random seed");
    segment->add_flag("--binary", config.binary, "Collapse output to moving/static");
    segment->add_option("--background-track", background_track, "Force the background group by track id");
    segment->add_option("--dump-affinity", affinity_dump, "Write the similarity matrix as text");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Render a synthetic rigid scene with ground truth");
    std::string preset, scene, sim_out;
    moseg::SimulateOptions sim_options;
    simulate->add_option("--preset", preset, "parallax-trap|two-movers|rotor|shared-motion");
    simulate->add_option("--spec", scene, "Scene script (JSON)");
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--noise-flow", sim_options.noise.sigma_flow, "Flow noise sigma (pixels)");
    simulate->add_option("--noise-depth", sim_options.noise.sigma_depth_rel, "Relative depth noise sigma");
    simulate->add_option("--seed", sim_options.seed, "Noise seed");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score predicted masks against ground truth");
    std::string pred_dir, gt_dir, report_path, csv_path;
    evaluate->add_option("--pred", pred_dir, "Directory of predicted label masks")->required();
    evaluate->add_option("--gt", gt_dir, "Directory of ground-truth label masks")->required();
    evaluate->add_option("--report", report_path, "Write a text report here");
    evaluate->add_option("--csv", csv_path, "Write the per-frame table here");

    // visualize
    auto* visualize = app.add_subcommand("visualize", "Render color overlays and flow wheels");
    std::string vis_masks, vis_flows, vis_out;
    visualize->add_option("--masks", vis_masks, "Directory of label masks")->required();
    visualize->add_option("--flows", vis_flows, "Directory of .flo files (optional)");
    visualize->add_option("--out", vis_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (segment->parsed()) {
            config.model = parse_model(model);
            config.ablation = parse_ablation(ablation);
            config.linear_form = parse_form(form);
            if (background_track >= 0) config.background_track = background_track;
            std::optional<std::filesystem::path> dump;
            if (!affinity_dump.empty()) dump = affinity_dump;
            return moseg::cmd_segment(manifest, seg_out, config, dump);
        }
        if (simulate->parsed()) {
            if (!preset.empty()) sim_options.preset = preset;
            if (!scene.empty()) sim_options.scene_path = scene;
            return moseg::cmd_simulate(sim_options, sim_out);
        }
        if (evaluate->parsed()) {
            std::optional<std::filesystem::path> report, csv;
            if (!report_path.empty()) report = report_path;
            if (!csv_path.empty()) csv = csv_path;
            return moseg::cmd_evaluate(pred_dir, gt_dir, report, csv);
        }
        if (visualize->parsed()) {
            std::optional<std::filesystem::path> flows;
            if (!vis_flows.empty()) flows = vis_flows;
            return moseg::cmd_visualize(vis_masks, flows, vis_out);
        }
    } catch (const moseg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

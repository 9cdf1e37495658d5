#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "moseg/flow_io.hpp"
#include "moseg/pfm_io.hpp"
#include "moseg/png_io.hpp"
#include "moseg/sequence.hpp"

namespace moseg {

using nlohmann::json;

InverseDepthMap to_inverse_depth(const DepthMap& d) {
    InverseDepthMap out;
    out.q = Grid<float>(d.width(), d.height());
    const bool invert = d.convention == DepthConvention::Depth;
    for (size_t i = 0; i < d.values.data.size(); ++i) {
        double q = invert ? 1.0 / d.values.data[i] : d.values.data[i];
        q = std::clamp(q, kInverseDepthMin, kInverseDepthMax);
        out.q.data[i] = static_cast<float>(q);
    }
    return out;
}

DepthMap read_depth(const std::filesystem::path& path, DepthConvention convention,
                    double png_scale) {
    DepthMap d;
    d.convention = convention;

    const std::string ext = path.extension().string();
    if (ext == ".pfm" || ext == ".PFM") {
        d.values = read_pfm(path);
        for (float v : d.values.data) {
            if (!std::isfinite(v))
                throw MalformedFile("non-finite depth value in " + path.string());
        }
    } else if (ext == ".png" || ext == ".PNG") {
        const Grid<uint16_t> raw = read_png16(path);
        if (!std::isfinite(png_scale) || png_scale <= 0.0)
            throw MalformedFile("invalid depth scale for " + path.string());
        d.values = Grid<float>(raw.width, raw.height);
        for (size_t i = 0; i < raw.data.size(); ++i)
            d.values.data[i] = static_cast<float>(raw.data[i] / 65535.0 * png_scale);
    } else {
        throw MalformedFile("unsupported depth container " + path.string());
    }

    for (float& v : d.values.data) {
        if (v <= 0.0f) {
            v = static_cast<float>(kDepthFloor);
            ++d.clamped_count;
        }
    }
    return d;
}

MaskFrame read_masks(const std::filesystem::path& path) {
    MaskFrame frame;
    frame.labels = read_png16(path);
    return frame;
}

void write_masks(const std::filesystem::path& path, const MaskFrame& frame) {
    write_png16(path, frame.labels);
}

namespace {

GroundTruthInfo gt_from_json(const json& j) {
    GroundTruthInfo gt;
    for (const auto& [key, value] : j.at("groups").items())
        gt.groups[std::stoi(key)] = value.get<int>();
    if (j.contains("background_group") && !j["background_group"].is_null())
        gt.background_group = j["background_group"].get<int>();
    if (j.contains("masks")) gt.mask_paths = j["masks"].get<std::vector<std::string>>();
    return gt;
}

json gt_to_json(const GroundTruthInfo& gt) {
    json j;
    json groups = json::object();
    for (const auto& [track, group] : gt.groups) groups[std::to_string(track)] = group;
    j["groups"] = groups;
    if (gt.background_group) j["background_group"] = *gt.background_group;
    if (!gt.mask_paths.empty()) j["masks"] = gt.mask_paths;
    return j;
}

}  // namespace

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open manifest " + path.string());

    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw MalformedFile("manifest " + path.string() + ": " + e.what());
    }

    Manifest m;
    try {
        m.version = j.at("version").get<int>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.frame_count = j.at("frame_count").get<int>();
        m.track_ids = j.at("track_ids").get<std::vector<int>>();
        const std::string conv = j.at("depth_convention").get<std::string>();
        if (conv == "depth")
            m.depth_convention = DepthConvention::Depth;
        else if (conv == "inverse_depth")
            m.depth_convention = DepthConvention::InverseDepth;
        else
            throw MalformedFile("manifest depth_convention must be depth|inverse_depth");
        m.depth_scale = j.value("depth_scale", 1.0);
        m.mask_paths = j.at("masks").get<std::vector<std::string>>();
        m.flow_paths = j.at("flows").get<std::vector<std::string>>();
        m.depth_paths = j.at("depths").get<std::vector<std::string>>();
        if (j.contains("gt")) m.gt = gt_from_json(j["gt"]);
    } catch (const json::exception& e) {
        throw MalformedFile("manifest " + path.string() + ": " + e.what());
    }

    if (m.version != 1)
        throw MalformedFile("unsupported manifest version in " + path.string());
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    json j;
    j["version"] = m.version;
    j["width"] = m.width;
    j["height"] = m.height;
    j["frame_count"] = m.frame_count;
    j["track_ids"] = m.track_ids;
    j["depth_convention"] =
        m.depth_convention == DepthConvention::Depth ? "depth" : "inverse_depth";
    j["depth_scale"] = m.depth_scale;
    j["masks"] = m.mask_paths;
    j["flows"] = m.flow_paths;
    j["depths"] = m.depth_paths;
    if (m.gt) j["gt"] = gt_to_json(*m.gt);

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

Sequence load_sequence(const std::filesystem::path& manifest_path) {
    const Manifest m = read_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();

    if (m.frame_count < 1) throw MalformedFile("manifest frame_count must be >= 1");
    if (static_cast<int>(m.mask_paths.size()) != m.frame_count)
        throw MalformedFile("manifest lists " + std::to_string(m.mask_paths.size()) +
                            " masks for " + std::to_string(m.frame_count) + " frames");
    if (static_cast<int>(m.flow_paths.size()) != m.frame_count - 1)
        throw MalformedFile("manifest lists " + std::to_string(m.flow_paths.size()) +
                            " flows; expected frame_count - 1");
    if (static_cast<int>(m.depth_paths.size()) != m.frame_count)
        throw MalformedFile("manifest lists " + std::to_string(m.depth_paths.size()) +
                            " depths for " + std::to_string(m.frame_count) + " frames");

    Sequence seq;
    seq.width = m.width;
    seq.height = m.height;
    seq.frame_count = m.frame_count;
    seq.track_ids = m.track_ids;
    seq.gt = m.gt;

    const std::set<int> registry(m.track_ids.begin(), m.track_ids.end());

    auto check_dims = [&](int w, int h, const std::string& what) {
        if (w != m.width || h != m.height)
            throw DimensionMismatch(what + " is " + std::to_string(w) + "x" + std::to_string(h) +
                                    "; manifest says " + std::to_string(m.width) + "x" +
                                    std::to_string(m.height));
    };

    for (const std::string& rel : m.mask_paths) {
        MaskFrame frame = read_masks(base / rel);
        check_dims(frame.width(), frame.height(), rel);
        for (uint16_t label : frame.labels.data) {
            if (label != 0 && !registry.count(label))
                throw UnknownTrackId("mask " + rel + " contains label " +
                                     std::to_string(label) + " not in track registry");
        }
        seq.masks.push_back(std::move(frame));
    }
    for (const std::string& rel : m.flow_paths) {
        FlowField flow = read_flow(base / rel);
        check_dims(flow.width, flow.height, rel);
        seq.flows.push_back(std::move(flow));
    }
    for (const std::string& rel : m.depth_paths) {
        DepthMap depth = read_depth(base / rel, m.depth_convention, m.depth_scale);
        check_dims(depth.width(), depth.height(), rel);
        seq.depths.push_back(std::move(depth));
    }
    return seq;
}

}  // namespace moseg

#include "moseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "moseg/flow_io.hpp"
#include "moseg/pfm_io.hpp"
#include "moseg/png_io.hpp"

namespace moseg {

using nlohmann::json;

std::pair<double, double> screw_flow(const ScrewMotion& m, double f, double x, double y,
                                     double q) {
    const double u = -(x * y / f) * m.wx + ((f * f + x * x) / f) * m.wy - y * m.wz +
                     (f * m.tx - x * m.tz) * q;
    const double v = -((f * f + y * y) / f) * m.wx + (x * y / f) * m.wy + x * m.wz +
                     (f * m.ty - y * m.tz) * q;
    return {u, v};
}

bool Region::contains(double x, double y) const {
    switch (kind) {
        case Kind::Rect:
            return std::abs(x - cx) <= half_w && std::abs(y - cy) <= half_h;
        case Kind::Ellipse: {
            if (half_w <= 0 || half_h <= 0) return false;
            const double dx = (x - cx) / half_w;
            const double dy = (y - cy) / half_h;
            return dx * dx + dy * dy <= 1.0;
        }
        case Kind::Polygon: {
            // Even-odd crossing rule.
            bool inside = false;
            const size_t n = polygon.size();
            for (size_t i = 0, j = n - 1; i < n; j = i++) {
                const auto [xi, yi] = polygon[i];
                const auto [xj, yj] = polygon[j];
                if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi)
                    inside = !inside;
            }
            return inside;
        }
    }
    return false;
}

void SceneSpec::validate() const {
    if (width < 1 || height < 1 || frame_count < 2)
        throw InvalidArgument("scene needs positive dimensions and >= 2 frames");
    if (camera.focal <= 0) throw InvalidArgument("focal length must be positive");

    std::set<int> groups;
    std::set<int> ids;
    for (const SceneObject& obj : objects) {
        if (obj.track_id < 1) throw InvalidArgument("track ids must be >= 1");
        if (!ids.insert(obj.track_id).second)
            throw InvalidArgument("duplicate track id " + std::to_string(obj.track_id));
        groups.insert(obj.group);
    }
    int expect = 0;
    for (int g : groups) {
        if (g != expect++)
            throw InvalidArgument("motion group ids must be contiguous from 0");
    }
    if (background_group && !groups.count(*background_group))
        throw InvalidArgument("background_group is not a group of any object");

    // Depth must be positive wherever it can be sampled.
    const CoordGrid grid = normalize_coords(width, height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const double x = grid.x_of(c), y = grid.y_of(r);
            if (background.z_at(x, y) <= 0)
                throw InvalidArgument("background depth nonpositive inside the image");
            for (const SceneObject& obj : objects) {
                if (obj.region.contains(x, y) && obj.depth.z_at(x, y) <= 0)
                    throw InvalidArgument("object depth nonpositive inside its region (track " +
                                          std::to_string(obj.track_id) + ")");
            }
        }
    }
}

namespace {

bool object_visible(const SceneObject& obj, int frame, int frame_count) {
    const int last = obj.last_frame < 0 ? frame_count - 1 : obj.last_frame;
    return frame >= obj.first_frame && frame <= last;
}

// Index of the owning object at (x, y) in frame, or -1 for the canvas.
// Later objects sit on top of earlier ones.
int owner_at(const SceneSpec& spec, int frame, double x, double y) {
    for (int i = static_cast<int>(spec.objects.size()) - 1; i >= 0; --i) {
        const SceneObject& obj = spec.objects[static_cast<size_t>(i)];
        if (object_visible(obj, frame, spec.frame_count) && obj.region.contains(x, y)) return i;
    }
    return -1;
}

}  // namespace

RenderedPair render_pair(const SceneSpec& spec, int frame) {
    if (frame < 0 || frame >= spec.frame_count - 1)
        throw InvalidArgument("frame pair index out of range");

    const CoordGrid grid = normalize_coords(spec.width, spec.height);
    const double f = spec.camera.focal;
    const double scale = spec.motion_scale(frame);

    RenderedPair out;
    out.flow = FlowField(spec.width, spec.height);
    out.depth.values = Grid<float>(spec.width, spec.height);
    out.depth.convention = spec.depth_convention;
    out.mask.labels = Grid<uint16_t>(spec.width, spec.height);

    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const double x = grid.x_of(c), y = grid.y_of(r);
            const int idx = owner_at(spec, frame, x, y);
            ScrewMotion motion = spec.camera_motion;
            double z;
            uint16_t label = 0;
            if (idx >= 0) {
                const SceneObject& obj = spec.objects[static_cast<size_t>(idx)];
                motion = motion + obj.motion;
                z = obj.depth.z_at(x, y);
                label = static_cast<uint16_t>(obj.track_id);
            } else {
                z = spec.background.z_at(x, y);
            }
            const auto [u, v] = screw_flow(motion * scale, f, x, y, 1.0 / z);
            out.flow.u(r, c) = static_cast<float>(u * grid.s_norm);
            out.flow.v(r, c) = static_cast<float>(v * grid.s_norm);
            out.depth.values.at(r, c) = static_cast<float>(
                spec.depth_convention == DepthConvention::Depth ? z : 1.0 / z);
            out.mask.labels.at(r, c) = label;
        }
    }
    return out;
}

DepthMap render_depth(const SceneSpec& spec, int frame) {
    const CoordGrid grid = normalize_coords(spec.width, spec.height);
    DepthMap depth;
    depth.values = Grid<float>(spec.width, spec.height);
    depth.convention = spec.depth_convention;
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const double x = grid.x_of(c), y = grid.y_of(r);
            const int idx = owner_at(spec, frame, x, y);
            const double z = idx >= 0 ? spec.objects[static_cast<size_t>(idx)].depth.z_at(x, y)
                                      : spec.background.z_at(x, y);
            depth.values.at(r, c) = static_cast<float>(
                spec.depth_convention == DepthConvention::Depth ? z : 1.0 / z);
        }
    }
    return depth;
}

MaskFrame render_mask(const SceneSpec& spec, int frame) {
    const CoordGrid grid = normalize_coords(spec.width, spec.height);
    MaskFrame mask;
    mask.labels = Grid<uint16_t>(spec.width, spec.height);
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const int idx = owner_at(spec, frame, grid.x_of(c), grid.y_of(r));
            mask.labels.at(r, c) =
                idx >= 0 ? static_cast<uint16_t>(spec.objects[static_cast<size_t>(idx)].track_id)
                         : 0;
        }
    }
    return mask;
}

std::map<int, int> scene_groups(const SceneSpec& spec) {
    std::map<int, int> groups;
    for (const SceneObject& obj : spec.objects) groups[obj.track_id] = obj.group;
    return groups;
}

void add_noise(FlowField& flow, double sigma_flow, Rng& rng) {
    if (sigma_flow <= 0) return;
    for (float& v : flow.data) v = static_cast<float>(v + sigma_flow * rng.next_gaussian());
}

void add_noise(DepthMap& depth, double sigma_depth_rel, Rng& rng) {
    if (sigma_depth_rel <= 0) return;
    for (float& v : depth.values.data) {
        const double noisy = v * (1.0 + sigma_depth_rel * rng.next_gaussian());
        v = static_cast<float>(std::max(noisy, kDepthFloor));
    }
}

namespace {

std::string frame_name(const std::string& prefix, int index, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return prefix + buf + ext;
}

}  // namespace

std::filesystem::path emit_sequence(const SceneSpec& spec, const std::filesystem::path& out_dir,
                                    const NoiseSpec& noise, uint64_t seed) {
    spec.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir / "masks", ec);
    fs::create_directories(out_dir / "flow", ec);
    fs::create_directories(out_dir / "depth", ec);
    fs::create_directories(out_dir / "gt", ec);
    if (ec) throw IoFailure("cannot create output directories under " + out_dir.string());

    Manifest m;
    m.width = spec.width;
    m.height = spec.height;
    m.frame_count = spec.frame_count;
    m.depth_convention = spec.depth_convention;
    for (const SceneObject& obj : spec.objects) m.track_ids.push_back(obj.track_id);
    std::sort(m.track_ids.begin(), m.track_ids.end());

    GroundTruthInfo gt;
    gt.groups = scene_groups(spec);
    gt.background_group = spec.background_group;

    // Group -> emitted ground-truth label: background becomes 0, moving
    // groups get 1..M in ascending group order.
    std::map<int, uint16_t> gt_label;
    {
        std::set<int> groups;
        for (const auto& [track, group] : gt.groups) groups.insert(group);
        uint16_t next = 1;
        for (int g : groups)
            gt_label[g] = (gt.background_group && g == *gt.background_group) ? 0 : next++;
    }

    Rng rng(seed);
    std::vector<MaskFrame> masks;
    for (int frame = 0; frame < spec.frame_count; ++frame) {
        DepthMap depth;
        if (frame < spec.frame_count - 1) {
            RenderedPair pair = render_pair(spec, frame);
            add_noise(pair.flow, noise.sigma_flow, rng);
            const std::string flow_rel = frame_name("flow/pair_", frame, ".flo");
            write_flow(out_dir / flow_rel, pair.flow);
            m.flow_paths.push_back(flow_rel);
            depth = std::move(pair.depth);
            masks.push_back(std::move(pair.mask));
        } else {
            depth = render_depth(spec, frame);
            masks.push_back(render_mask(spec, frame));
        }
        add_noise(depth, noise.sigma_depth_rel, rng);

        const std::string depth_rel = frame_name("depth/frame_", frame, ".pfm");
        write_pfm(out_dir / depth_rel, depth.values);
        m.depth_paths.push_back(depth_rel);

        const std::string mask_rel = frame_name("masks/frame_", frame, ".png");
        write_masks(out_dir / mask_rel, masks.back());
        m.mask_paths.push_back(mask_rel);

        MaskFrame gt_mask;
        gt_mask.labels = Grid<uint16_t>(spec.width, spec.height);
        for (size_t i = 0; i < gt_mask.labels.data.size(); ++i) {
            const uint16_t track = masks.back().labels.data[i];
            gt_mask.labels.data[i] = track == 0 ? 0 : gt_label.at(gt.groups.at(track));
        }
        const std::string gt_rel = frame_name("gt/frame_", frame, ".png");
        write_masks(out_dir / gt_rel, gt_mask);
        gt.mask_paths.push_back(gt_rel);
    }

    m.gt = gt;
    const fs::path manifest_path = out_dir / "manifest.json";
    write_manifest(manifest_path, m);
    return manifest_path;
}

namespace {

SceneObject make_object(int track, int group, Region region, DepthPlane depth,
                        ScrewMotion motion = {}, int first = 0, int last = -1) {
    SceneObject obj;
    obj.track_id = track;
    obj.group = group;
    obj.region = region;
    obj.depth = depth;
    obj.motion = motion;
    obj.first_frame = first;
    obj.last_frame = last;
    return obj;
}

Region rect(double cx, double cy, double hw, double hh) {
    Region r;
    r.kind = Region::Kind::Rect;
    r.cx = cx;
    r.cy = cy;
    r.half_w = hw;
    r.half_h = hh;
    return r;
}

Region ellipse(double cx, double cy, double hw, double hh) {
    Region r = rect(cx, cy, hw, hh);
    r.kind = Region::Kind::Ellipse;
    return r;
}

const std::vector<double> kMotionRipple = {1.0, 1.12, 0.93, 1.05, 0.98, 1.08};

}  // namespace

SceneSpec make_preset(const std::string& name) {
    SceneSpec s;
    s.frame_motion_scale = kMotionRipple;

    if (name == "parallax-trap") {
        // Forward ego-motion over three static depth layers plus one mover
        // whose image flow mimics the near layer: flow alone cannot separate
        // it, inverse depth can.
        s.frame_count = 4;
        s.camera_motion = {0, 0, 0.02, 0, 0, 0};
        s.background = {16.0, 0.0, 0.0};
        s.background_group = 0;
        s.objects = {
            make_object(1, 0, rect(0.0, 0.55, 0.92, 0.26), {1.0, 0.05, 0.02}),
            make_object(2, 0, rect(0.0, -0.02, 0.92, 0.22), {4.0, 0.04, 0.0}),
            make_object(3, 0, rect(0.0, -0.55, 0.92, 0.20), {16.0, 0.0, 0.03}),
            make_object(4, 1, ellipse(0.30, -0.02, 0.17, 0.15), {4.0, 0.0, 0.03},
                        {0, 0, 0.06, 0, 0, 0}),
        };
    } else if (name == "two-movers") {
        s.frame_count = 6;
        s.camera_motion = {0.01, 0, 0.02, 0, 0, 0};
        s.background = {12.0, 0.05, 0.03};
        s.background_group = 0;
        s.objects = {
            make_object(1, 0, rect(0.0, -0.55, 0.95, 0.38), {10.0, 0.08, 0.10}),
            make_object(2, 0, rect(-0.60, 0.30, 0.24, 0.24), {3.0, 0.10, 0.0}),
            make_object(3, 0, ellipse(0.62, 0.35, 0.20, 0.26), {6.0, 0.0, -0.08}, {}, 0, 4),
            make_object(4, 1, rect(-0.12, 0.30, 0.20, 0.18), {2.0, 0.05, 0.0},
                        {0.06, 0.01, 0, 0, 0, 0}),
            make_object(5, 2, ellipse(0.15, 0.72, 0.18, 0.16), {2.5, 0.0, 0.04},
                        {-0.02, 0.05, -0.04, 0, 0, 0.008}),
        };
    } else if (name == "rotor") {
        // Two objects sharing a spin about the optical axis and two sharing a
        // lateral translation at very different depths.
        s.frame_count = 4;
        s.camera_motion = {};
        s.background = {10.0, 0.0, 0.0};
        s.objects = {
            make_object(1, 0, ellipse(-0.50, -0.42, 0.26, 0.30), {4.0, 0.10, 0.0},
                        {0, 0, 0, 0, 0, 0.02}),
            make_object(2, 0, rect(0.55, -0.45, 0.22, 0.20), {7.0, 0.0, -0.06},
                        {0, 0, 0, 0, 0, 0.02}),
            make_object(3, 1, rect(-0.50, 0.45, 0.24, 0.22), {3.0, 0.0, 0.0},
                        {0.04, -0.01, 0, 0, 0, 0}),
            make_object(4, 1, ellipse(0.50, 0.50, 0.20, 0.24), {8.0, -0.05, 0.0},
                        {0.04, -0.01, 0, 0, 0, 0}),
        };
    } else if (name == "shared-motion") {
        s.frame_count = 4;
        s.camera_motion = {0.012, -0.008, 0.015, 0, 0, 0};
        s.background = {9.0, 0.04, -0.03};
        s.background_group = 0;
        s.objects = {
            make_object(1, 0, rect(0.0, -0.50, 0.90, 0.32), {8.0, 0.06, -0.04}),
            make_object(2, 1, rect(-0.45, 0.35, 0.26, 0.22), {2.5, 0.05, 0.0},
                        {0.035, 0.02, 0, 0, 0, 0.01}),
            make_object(3, 1, ellipse(0.45, 0.40, 0.22, 0.26), {5.0, 0.0, -0.04},
                        {0.035, 0.02, 0, 0, 0, 0.01}),
        };
    } else {
        throw InvalidArgument("unknown preset '" + name + "'");
    }
    s.validate();
    return s;
}

std::vector<std::string> preset_names() {
    return {"parallax-trap", "two-movers", "rotor", "shared-motion"};
}

namespace {

json motion_to_json(const ScrewMotion& m) {
    return json{{"translation", {m.tx, m.ty, m.tz}}, {"rotation", {m.wx, m.wy, m.wz}}};
}

ScrewMotion motion_from_json(const json& j) {
    ScrewMotion m;
    const auto t = j.at("translation");
    const auto r = j.at("rotation");
    m.tx = t.at(0).get<double>();
    m.ty = t.at(1).get<double>();
    m.tz = t.at(2).get<double>();
    m.wx = r.at(0).get<double>();
    m.wy = r.at(1).get<double>();
    m.wz = r.at(2).get<double>();
    return m;
}

json depth_to_json(const DepthPlane& d) {
    return json{{"z0", d.z0}, {"gx", d.gx}, {"gy", d.gy}};
}

DepthPlane depth_from_json(const json& j) {
    return {j.at("z0").get<double>(), j.value("gx", 0.0), j.value("gy", 0.0)};
}

json region_to_json(const Region& r) {
    switch (r.kind) {
        case Region::Kind::Rect:
            return json{{"type", "rect"}, {"cx", r.cx}, {"cy", r.cy},
                        {"half_w", r.half_w}, {"half_h", r.half_h}};
        case Region::Kind::Ellipse:
            return json{{"type", "ellipse"}, {"cx", r.cx}, {"cy", r.cy},
                        {"half_w", r.half_w}, {"half_h", r.half_h}};
        case Region::Kind::Polygon: {
            json pts = json::array();
            for (const auto& [x, y] : r.polygon) pts.push_back({x, y});
            return json{{"type", "polygon"}, {"points", pts}};
        }
    }
    throw InvalidArgument("unhandled region kind");
}

Region region_from_json(const json& j) {
    Region r;
    const std::string type = j.at("type").get<std::string>();
    if (type == "rect" || type == "ellipse") {
        r.kind = type == "rect" ? Region::Kind::Rect : Region::Kind::Ellipse;
        r.cx = j.at("cx").get<double>();
        r.cy = j.at("cy").get<double>();
        r.half_w = j.at("half_w").get<double>();
        r.half_h = j.at("half_h").get<double>();
    } else if (type == "polygon") {
        r.kind = Region::Kind::Polygon;
        for (const auto& p : j.at("points"))
            r.polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        if (r.polygon.size() < 3) throw MalformedFile("polygon needs >= 3 points");
    } else {
        throw MalformedFile("unknown region type '" + type + "'");
    }
    return r;
}

}  // namespace

SceneSpec read_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open scene spec " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw MalformedFile("scene spec " + path.string() + ": " + e.what());
    }

    SceneSpec s;
    try {
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.frame_count = j.at("frames").get<int>();
        s.camera.focal = j.value("focal", 1.0);
        if (j.contains("camera")) s.camera_motion = motion_from_json(j["camera"]);
        s.background = depth_from_json(j.at("background").at("depth"));
        if (j.contains("background_group") && !j["background_group"].is_null())
            s.background_group = j["background_group"].get<int>();
        if (j.contains("frame_motion_scale"))
            s.frame_motion_scale = j["frame_motion_scale"].get<std::vector<double>>();
        const std::string conv = j.value("depth_convention", std::string("depth"));
        if (conv == "inverse_depth")
            s.depth_convention = DepthConvention::InverseDepth;
        else if (conv != "depth")
            throw MalformedFile("depth_convention must be depth|inverse_depth");
        for (const auto& jo : j.at("objects")) {
            SceneObject obj;
            obj.track_id = jo.at("track").get<int>();
            obj.group = jo.at("group").get<int>();
            obj.region = region_from_json(jo.at("region"));
            obj.depth = depth_from_json(jo.at("depth"));
            if (jo.contains("motion")) obj.motion = motion_from_json(jo["motion"]);
            if (jo.contains("frames")) {
                obj.first_frame = jo["frames"].at(0).get<int>();
                obj.last_frame = jo["frames"].at(1).get<int>();
            }
            s.objects.push_back(obj);
        }
    } catch (const json::exception& e) {
        throw MalformedFile("scene spec " + path.string() + ": " + e.what());
    }
    s.validate();
    return s;
}

void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
    json j;
    j["version"] = 1;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["frames"] = spec.frame_count;
    j["focal"] = spec.camera.focal;
    j["camera"] = motion_to_json(spec.camera_motion);
    j["background"] = json{{"depth", depth_to_json(spec.background)}};
    if (spec.background_group) j["background_group"] = *spec.background_group;
    if (!spec.frame_motion_scale.empty()) j["frame_motion_scale"] = spec.frame_motion_scale;
    j["depth_convention"] =
        spec.depth_convention == DepthConvention::Depth ? "depth" : "inverse_depth";
    json objects = json::array();
    for (const SceneObject& obj : spec.objects) {
        json jo;
        jo["track"] = obj.track_id;
        jo["group"] = obj.group;
        jo["region"] = region_to_json(obj.region);
        jo["depth"] = depth_to_json(obj.depth);
        jo["motion"] = motion_to_json(obj.motion);
        if (obj.first_frame != 0 || obj.last_frame != -1)
            jo["frames"] = {obj.first_frame, obj.last_frame};
        objects.push_back(jo);
    }
    j["objects"] = objects;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write scene spec " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace moseg

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moseg/coords.hpp"
#include "moseg/grid.hpp"
#include "moseg/rng.hpp"
#include "moseg/sequence.hpp"

namespace moseg {

// Instantaneous rigid motion: translation rates (scene units/frame) and
// rotation rates (radians/frame) in the camera frame.
struct ScrewMotion {
    double tx = 0, ty = 0, tz = 0;
    double wx = 0, wy = 0, wz = 0;

    ScrewMotion operator+(const ScrewMotion& o) const {
        return {tx + o.tx, ty + o.ty, tz + o.tz, wx + o.wx, wy + o.wy, wz + o.wz};
    }
    ScrewMotion operator*(double s) const { return {tx * s, ty * s, tz * s, wx * s, wy * s, wz * s}; }
};

struct CameraModel {
    double focal = 1.0;  // normalized-coordinate units
};

// Screw-motion flow field at one pixel: x, y normalized, q = 1/z.
// Returns (u, v) in normalized units/frame.
std::pair<double, double> screw_flow(const ScrewMotion& m, double f, double x, double y, double q);

// Affine depth plane z(x, y) = z0 * (1 + gx*x + gy*y), positive on its region.
struct DepthPlane {
    double z0 = 1.0;
    double gx = 0.0;
    double gy = 0.0;

    double z_at(double x, double y) const { return z0 * (1.0 + gx * x + gy * y); }
};

struct Region {
    enum class Kind { Rect, Ellipse, Polygon };
    Kind kind = Kind::Rect;
    double cx = 0, cy = 0;       // center (rect/ellipse)
    double half_w = 0, half_h = 0;
    std::vector<std::pair<double, double>> polygon;  // normalized coords

    bool contains(double x, double y) const;
};

struct SceneObject {
    int track_id = 0;
    int group = 0;
    Region region;
    DepthPlane depth;
    ScrewMotion motion;          // own motion; camera motion is added on top
    int first_frame = 0;
    int last_frame = -1;         // inclusive; -1 = until the end
};

// Scripted rigid scene. The camera's ego-motion is expressed as the shared
// relative screw applied to everything; static objects have zero own motion.
struct SceneSpec {
    int width = 64;
    int height = 64;
    int frame_count = 4;
    CameraModel camera;
    ScrewMotion camera_motion;
    DepthPlane background;       // untracked canvas (mask label 0)
    std::vector<SceneObject> objects;
    std::optional<int> background_group;
    std::vector<double> frame_motion_scale;  // optional per-frame modulation
    DepthConvention depth_convention = DepthConvention::Depth;

    double motion_scale(int frame) const {
        if (frame_motion_scale.empty()) return 1.0;
        return frame_motion_scale[static_cast<size_t>(frame) % frame_motion_scale.size()];
    }
    void validate() const;
};

struct RenderedPair {
    FlowField flow;      // pixels/frame
    DepthMap depth;      // of frame m
    MaskFrame mask;      // of frame m
};

// Evaluates the screw-motion field once per pixel of frame m with the owning
// object's relative motion and depth. Painter's order: later objects on top.
RenderedPair render_pair(const SceneSpec& spec, int frame);

// Depth map and mask of a single frame (used for the final frame, which has
// no outgoing flow).
DepthMap render_depth(const SceneSpec& spec, int frame);
MaskFrame render_mask(const SceneSpec& spec, int frame);

// Ground-truth track -> group labeling of the scene.
std::map<int, int> scene_groups(const SceneSpec& spec);

struct NoiseSpec {
    double sigma_flow = 0.0;       // pixels, additive i.i.d. Gaussian per component
    double sigma_depth_rel = 0.0;  // relative, multiplicative (1 + N(0, sigma))
};

void add_noise(FlowField& flow, double sigma_flow, Rng& rng);
void add_noise(DepthMap& depth, double sigma_depth_rel, Rng& rng);

// Writes all cue files plus a manifest (with ground-truth groups and
// group-label masks) into out_dir. Returns the manifest path.
std::filesystem::path emit_sequence(const SceneSpec& spec, const std::filesystem::path& out_dir,
                                    const NoiseSpec& noise = {}, uint64_t seed = 1);

// Built-in scenes: parallax-trap, two-movers, rotor, shared-motion.
SceneSpec make_preset(const std::string& name);
std::vector<std::string> preset_names();

// Scene-script (JSON) serialization.
SceneSpec read_scene_spec(const std::filesystem::path& path);
void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);

}  // namespace moseg

#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "moseg/coords.hpp"
#include "moseg/grid.hpp"
#include "moseg/sequence.hpp"

namespace moseg {

// Per-object regression data for one frame pair. Coordinates are normalized
// (CoordGrid), q is inverse depth, and u/v are flow divided by s_norm so
// residual magnitudes are resolution-independent.
struct PixelSample {
    std::vector<double> x, y, q, u, v;

    int n() const { return static_cast<int>(x.size()); }
    void push(double xi, double yi, double qi, double ui, double vi) {
        x.push_back(xi);
        y.push_back(yi);
        q.push_back(qi);
        u.push_back(ui);
        v.push_back(vi);
    }
};

// Which algebraic form of the depth-aware linear model to use. Derived is
// the expansion of the screw-motion flow field and is the default; Printed
// flips the sign of the d*x and f*y^2 terms in the v equation and exists
// only for side-by-side comparison.
enum class LinearModelForm { Derived, Printed };

// Depth-aware linear flow model with 8 coefficients:
//   u = a + b*q - c*x*q - d*y + e*x^2 - f*x*y
//   v = g + h*q - c*y*q + d*x + e*x*y - f*y^2   (Derived form)
// Spans every rigid screw-motion field without knowing camera intrinsics;
// depth enters through the data q, not through extra unknowns.
struct LinearMotionModel {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0, g = 0, h = 0;
    LinearModelForm form = LinearModelForm::Derived;

    std::pair<double, double> predict(double x, double y, double q) const {
        const double u = a + b * q - c * x * q - d * y + e * x * x - f * x * y;
        double v;
        if (form == LinearModelForm::Derived)
            v = g + h * q - c * y * q + d * x + e * x * y - f * y * y;
        else
            v = g + h * q - c * y * q - d * x + e * x * y + f * y * y;
        return {u, v};
    }

    std::array<double, 8> coeffs() const { return {a, b, c, d, e, f, g, h}; }
    void set_coeffs(const std::array<double, 8>& t) {
        a = t[0]; b = t[1]; c = t[2]; d = t[3]; e = t[4]; f = t[5]; g = t[6]; h = t[7];
    }
};

// Depth-free quadratic flow model, 12 coefficients:
//   u = a + b*x + c*y + d*x^2 + e*x*y + f*y^2
//   v = g + h*x + i*y + j*x^2 + k*x*y + l*y^2
struct QuadraticMotionModel {
    std::array<double, 6> cu{};  // a..f
    std::array<double, 6> cv{};  // g..l

    std::pair<double, double> predict(double x, double y) const {
        const double u = cu[0] + cu[1] * x + cu[2] * y + cu[3] * x * x + cu[4] * x * y + cu[5] * y * y;
        const double v = cv[0] + cv[1] * x + cv[2] * y + cv[3] * x * x + cv[4] * x * y + cv[5] * y * y;
        return {u, v};
    }
};

inline constexpr int kFitQuorum = 16;       // minimum pixels per fit
inline constexpr int kDefaultMaxSamples = 5000;

// Least-squares fit of the linear depth-aware model. Uses a rank-revealing
// orthogonal factorization (minimum-norm solution); on rank deficiency the
// normal equations are re-solved with ridge 1e-8 * trace(XtX) / p. The
// residual, the only quantity consumed downstream, is stable either way.
LinearMotionModel fit_linear_model(const PixelSample& s,
                                   LinearModelForm form = LinearModelForm::Derived,
                                   int quorum = kFitQuorum);

QuadraticMotionModel fit_quadratic_model(const PixelSample& s, int quorum = kFitQuorum);

// Mean squared flow residual (1/n) * sum[(u_pred-u)^2 + (v_pred-v)^2],
// evaluated through the polynomial prediction path.
double model_residual(const LinearMotionModel& m, const PixelSample& s);
double model_residual(const QuadraticMotionModel& m, const PixelSample& s);

// Gradient of the summed squared residual w.r.t. the coefficients, computed
// from the normal equations (2 * Xt * (X*theta - y)).
std::array<double, 8> loss_gradient(const LinearMotionModel& m, const PixelSample& s);
std::array<double, 12> loss_gradient(const QuadraticMotionModel& m, const PixelSample& s);

// Deterministic uniform subsample (without replacement) of a track's mask
// pixels in frame m, with the pair's flow and the frame's inverse depth
// attached. Throws InsufficientData below the quorum.
PixelSample sample_pixels(const MaskFrame& mask, const FlowField& flow,
                          const InverseDepthMap& inv_depth, const CoordGrid& grid,
                          int track_id, int max_n, uint64_t seed, int quorum = kFitQuorum);

}  // namespace moseg

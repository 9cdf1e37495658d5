#include "moseg/motion_model.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "moseg/rng.hpp"

namespace moseg {

namespace {

// Stacked design matrix for the linear model: each pixel contributes one
// u-row and one v-row over theta = [a, b, c, d, e, f, g, h].
Eigen::MatrixXd linear_design(const PixelSample& s, LinearModelForm form) {
    const int n = s.n();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2 * n, 8);
    const double dsign = form == LinearModelForm::Derived ? 1.0 : -1.0;
    const double fsign = form == LinearModelForm::Derived ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.x[i], y = s.y[i], q = s.q[i];
        X(2 * i, 0) = 1.0;
        X(2 * i, 1) = q;
        X(2 * i, 2) = -x * q;
        X(2 * i, 3) = -y;
        X(2 * i, 4) = x * x;
        X(2 * i, 5) = -x * y;
        X(2 * i + 1, 2) = -y * q;
        X(2 * i + 1, 3) = dsign * x;
        X(2 * i + 1, 4) = x * y;
        X(2 * i + 1, 5) = fsign * y * y;
        X(2 * i + 1, 6) = 1.0;
        X(2 * i + 1, 7) = q;
    }
    return X;
}

Eigen::MatrixXd quadratic_design(const PixelSample& s) {
    const int n = s.n();
    Eigen::MatrixXd X(n, 6);
    for (int i = 0; i < n; ++i) {
        const double x = s.x[i], y = s.y[i];
        X(i, 0) = 1.0;
        X(i, 1) = x;
        X(i, 2) = y;
        X(i, 3) = x * x;
        X(i, 4) = x * y;
        X(i, 5) = y * y;
    }
    return X;
}

// Rank-revealing solve with ridge fallback on rank deficiency.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    Eigen::VectorXd theta;
    if (cod.rank() == X.cols()) {
        theta = cod.solve(y);
    } else {
        const Eigen::MatrixXd xtx = X.transpose() * X;
        const double lambda = 1e-8 * xtx.trace() / static_cast<double>(X.cols());
        Eigen::MatrixXd reg = xtx;
        reg.diagonal().array() += lambda;
        theta = reg.ldlt().solve(X.transpose() * y);
    }
    if (!theta.allFinite()) throw NumericalFailure("least-squares solution is not finite");
    return theta;
}

void check_quorum(const PixelSample& s, int quorum) {
    if (s.n() < quorum)
        throw InsufficientData("fit needs >= " + std::to_string(quorum) + " pixels, got " +
                               std::to_string(s.n()));
    for (int i = 0; i < s.n(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || !std::isfinite(s.q[i]) ||
            !std::isfinite(s.u[i]) || !std::isfinite(s.v[i]))
            throw NonFiniteValue("pixel sample contains non-finite entries");
    }
}

}  // namespace

LinearMotionModel fit_linear_model(const PixelSample& s, LinearModelForm form, int quorum) {
    check_quorum(s, quorum);
    const int n = s.n();
    const Eigen::MatrixXd X = linear_design(s, form);
    Eigen::VectorXd y(2 * n);
    for (int i = 0; i < n; ++i) {
        y(2 * i) = s.u[i];
        y(2 * i + 1) = s.v[i];
    }
    const Eigen::VectorXd theta = solve_least_squares(X, y);
    LinearMotionModel m;
    m.form = form;
    std::array<double, 8> c;
    for (int i = 0; i < 8; ++i) c[static_cast<size_t>(i)] = theta(i);
    m.set_coeffs(c);
    return m;
}

QuadraticMotionModel fit_quadratic_model(const PixelSample& s, int quorum) {
    check_quorum(s, quorum);
    const int n = s.n();
    const Eigen::MatrixXd X = quadratic_design(s);
    Eigen::VectorXd yu(n), yv(n);
    for (int i = 0; i < n; ++i) {
        yu(i) = s.u[i];
        yv(i) = s.v[i];
    }
    const Eigen::VectorXd tu = solve_least_squares(X, yu);
    const Eigen::VectorXd tv = solve_least_squares(X, yv);
    QuadraticMotionModel m;
    for (int i = 0; i < 6; ++i) {
        m.cu[static_cast<size_t>(i)] = tu(i);
        m.cv[static_cast<size_t>(i)] = tv(i);
    }
    return m;
}

double model_residual(const LinearMotionModel& m, const PixelSample& s) {
    const int n = s.n();
    if (n < 1) throw InsufficientData("residual needs at least one pixel");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto [up, vp] = m.predict(s.x[i], s.y[i], s.q[i]);
        const double du = up - s.u[i];
        const double dv = vp - s.v[i];
        acc += du * du + dv * dv;
    }
    return acc / n;
}

double model_residual(const QuadraticMotionModel& m, const PixelSample& s) {
    const int n = s.n();
    if (n < 1) throw InsufficientData("residual needs at least one pixel");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto [up, vp] = m.predict(s.x[i], s.y[i]);
        const double du = up - s.u[i];
        const double dv = vp - s.v[i];
        acc += du * du + dv * dv;
    }
    return acc / n;
}

std::array<double, 8> loss_gradient(const LinearMotionModel& m, const PixelSample& s) {
    const int n = s.n();
    const Eigen::MatrixXd X = linear_design(s, m.form);
    Eigen::VectorXd y(2 * n), theta(8);
    for (int i = 0; i < n; ++i) {
        y(2 * i) = s.u[i];
        y(2 * i + 1) = s.v[i];
    }
    const auto c = m.coeffs();
    for (int i = 0; i < 8; ++i) theta(i) = c[static_cast<size_t>(i)];
    const Eigen::VectorXd g = 2.0 * X.transpose() * (X * theta - y);
    std::array<double, 8> out;
    for (int i = 0; i < 8; ++i) out[static_cast<size_t>(i)] = g(i);
    return out;
}

std::array<double, 12> loss_gradient(const QuadraticMotionModel& m, const PixelSample& s) {
    const int n = s.n();
    const Eigen::MatrixXd X = quadratic_design(s);
    Eigen::VectorXd yu(n), yv(n), tu(6), tv(6);
    for (int i = 0; i < n; ++i) {
        yu(i) = s.u[i];
        yv(i) = s.v[i];
    }
    for (int i = 0; i < 6; ++i) {
        tu(i) = m.cu[static_cast<size_t>(i)];
        tv(i) = m.cv[static_cast<size_t>(i)];
    }
    const Eigen::VectorXd gu = 2.0 * X.transpose() * (X * tu - yu);
    const Eigen::VectorXd gv = 2.0 * X.transpose() * (X * tv - yv);
    std::array<double, 12> out;
    for (int i = 0; i < 6; ++i) {
        out[static_cast<size_t>(i)] = gu(i);
        out[static_cast<size_t>(i + 6)] = gv(i);
    }
    return out;
}

PixelSample sample_pixels(const MaskFrame& mask, const FlowField& flow,
                          const InverseDepthMap& inv_depth, const CoordGrid& grid,
                          int track_id, int max_n, uint64_t seed, int quorum) {
    if (mask.width() != flow.width || mask.height() != flow.height ||
        mask.width() != inv_depth.width() || mask.height() != inv_depth.height())
        throw DimensionMismatch("mask/flow/depth dimensions disagree in sample_pixels");

    std::vector<int64_t> indices;
    const int64_t total = static_cast<int64_t>(mask.width()) * mask.height();
    for (int64_t i = 0; i < total; ++i) {
        if (mask.labels.data[static_cast<size_t>(i)] == track_id)
            indices.push_back(i);
    }
    if (static_cast<int>(indices.size()) < quorum)
        throw InsufficientData("track " + std::to_string(track_id) + " has " +
                               std::to_string(indices.size()) + " pixels; quorum is " +
                               std::to_string(quorum));

    const int take = static_cast<int>(
        std::min<int64_t>(max_n, static_cast<int64_t>(indices.size())));
    // Partial Fisher-Yates: the first `take` entries become the sample.
    Rng rng(seed);
    for (int i = 0; i < take; ++i) {
        const int64_t j = i + static_cast<int64_t>(rng.next_below(indices.size() - i));
        std::swap(indices[static_cast<size_t>(i)], indices[static_cast<size_t>(j)]);
    }

    PixelSample s;
    s.x.reserve(static_cast<size_t>(take));
    for (int i = 0; i < take; ++i) {
        const int64_t idx = indices[static_cast<size_t>(i)];
        const int row = static_cast<int>(idx / mask.width());
        const int col = static_cast<int>(idx % mask.width());
        s.push(grid.x_of(col), grid.y_of(row), inv_depth.q.data[static_cast<size_t>(idx)],
               flow.u(row, col) / grid.s_norm, flow.v(row, col) / grid.s_norm);
    }
    return s;
}

}  // namespace moseg

#include "manidyn/kinematics.hpp"

#include <Eigen/SVD>

#include "manidyn/errors.hpp"

namespace manidyn {

namespace {

// Second-order time stencils over the slice sequence.
Mat time_d1(const std::vector<Mat>& f, double dt, int t) {
    const int n = static_cast<int>(f.size());
    if (t > 0 && t < n - 1) return (f[t + 1] - f[t - 1]) / (2.0 * dt);
    if (t == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
}

Mat time_d2(const std::vector<Mat>& f, double dt, int t) {
    const int n = static_cast<int>(f.size());
    const double dt2 = dt * dt;
    if (t > 0 && t < n - 1) return (f[t + 1] - 2.0 * f[t] + f[t - 1]) / dt2;
    if (t == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / dt2;
    return (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / dt2;
}

}  // namespace

void Motion::validate(const SpaceChart& chart, double embedding_tol) const {
    for (std::size_t n = 0; n < slices.size(); ++n) {
        const Mat& s = slices[n];
        for (int p = 0; p < grid.points(); ++p) {
            Vec y = s.row(p).transpose();
            if (!chart.domain.contains(y))
                throw ChartExitError("motion value outside chart domain at time index " +
                                         std::to_string(n) + ", point " + std::to_string(p),
                                     static_cast<double>(n) * dt);
        }
        Jet1Field J = jet_of_slice(grid, s);
        for (int p = 0; p < grid.points(); ++p) {
            Eigen::JacobiSVD<Mat> svd(J.first[p]);
            if (svd.singularValues().minCoeff() < embedding_tol)
                throw Error("motion is not an embedding: rank-deficient spatial Jacobian at "
                            "time index " +
                            std::to_string(n) + ", point " + std::to_string(p));
        }
    }
}

Motion stationary_motion(const BodyGrid& grid, const Mat& phi, int steps, double dt) {
    Motion m{grid, dt, {}};
    m.slices.assign(static_cast<std::size_t>(steps) + 1, phi);
    return m;
}

DisplacementField zero_displacement(const Motion& motion) {
    DisplacementField w;
    w.slices.assign(motion.slices.size(),
                    Mat::Zero(motion.grid.points(), motion.space_dim()));
    return w;
}

Jet1Field jet_of_slice(const BodyGrid& grid, const Mat& slice) {
    const int d = grid.dim();
    const int m = static_cast<int>(slice.cols());
    Jet1Field out;
    out.y = slice;
    std::vector<Mat> d1(d);
    for (int a = 0; a < d; ++a) d1[a] = grid.d1(slice, a);
    std::vector<std::vector<Mat>> dd(d, std::vector<Mat>(d));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) dd[a][b] = (a == b) ? grid.d2(slice, a) : grid.dmixed(slice, a, b);
    out.first.resize(grid.points());
    out.second.resize(grid.points());
    for (int p = 0; p < grid.points(); ++p) {
        Mat A(m, d);
        for (int a = 0; a < d; ++a) A.col(a) = d1[a].row(p).transpose();
        out.first[p] = std::move(A);
        Tensor S = Tensor::zeros({m, d, d});
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) S(i, a, b) = dd[a][b](p, i);
        out.second[p] = std::move(S);
    }
    return out;
}

Jet1Field jet(const Motion& motion, int t) {
    if (t < 0 || t >= static_cast<int>(motion.slices.size()))
        throw Error("jet: time index out of range");
    return jet_of_slice(motion.grid, motion.slices[t]);
}

Mat velocity_slice(const Motion& motion, int t) {
    if (motion.steps() < 2) throw StencilError("velocity: need at least 3 time slices");
    return time_d1(motion.slices, motion.dt, t);
}

DisplacementField velocity(const Motion& motion) {
    DisplacementField v;
    v.slices.resize(motion.slices.size());
    for (int t = 0; t <= motion.steps(); ++t) v.slices[t] = velocity_slice(motion, t);
    return v;
}

Mat acceleration_slice(const Motion& motion, const SpaceChart& chart, int t) {
    if (motion.steps() < 3) throw StencilError("acceleration: need at least 4 time slices");
    const int m = motion.space_dim();
    Mat acc = time_d2(motion.slices, motion.dt, t);
    Mat vel = time_d1(motion.slices, motion.dt, t);
    for (int p = 0; p < motion.grid.points(); ++p) {
        Vec y = motion.slices[t].row(p).transpose();
        if (!chart.domain.contains(y))
            throw ChartExitError("acceleration: value outside chart domain", t * motion.dt);
        Tensor Gam = christoffel(chart, y);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int l = 0; l < m; ++l)
                for (int k = 0; k < m; ++k) s += Gam(i, l, k) * vel(p, l) * vel(p, k);
            acc(p, i) += s;
        }
    }
    return acc;
}

DisplacementField acceleration(const Motion& motion, const SpaceChart& chart) {
    DisplacementField a;
    a.slices.resize(motion.slices.size());
    for (int t = 0; t <= motion.steps(); ++t)
        a.slices[t] = acceleration_slice(motion, chart, t);
    return a;
}

Mat second_covariant_time_derivative_slice(const Motion& motion, const DisplacementField& w,
                                           const SpaceChart& chart, int t) {
    // Expansion of two nested covariant time derivatives:
    //   (D²w/dt²)^i = ∂_tt w^i + 2 Γ^i_{jk} V^j ∂_t w^k
    //               + (∂_l Γ^i_{jk} V^l V^j + Γ^i_{jk} ∂_t V^j) w^k
    //               + Γ^i_{jq} V^j Γ^q_{pk} V^p w^k.
    const int m = motion.space_dim();
    Mat out = time_d2(w.slices, motion.dt, t);
    Mat wdot = time_d1(w.slices, motion.dt, t);
    Mat vel = time_d1(motion.slices, motion.dt, t);
    Mat vdot = time_d2(motion.slices, motion.dt, t);
    for (int p = 0; p < motion.grid.points(); ++p) {
        Vec y = motion.slices[t].row(p).transpose();
        Tensor Gam = christoffel(chart, y);
        Tensor dGam = christoffel_derivative(chart, y);
        // Γ(V, w) at this point, reused by the nested term.
        Vec inner = Vec::Zero(m);
        for (int q = 0; q < m; ++q) {
            double si = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    si += Gam(q, j, k) * vel(p, j) * w.slices[t](p, k);
            inner[q] = si;
        }
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    s += 2.0 * Gam(i, j, k) * vel(p, j) * wdot(p, k);
                    s += Gam(i, j, k) * vdot(p, j) * w.slices[t](p, k);
                    for (int l = 0; l < m; ++l)
                        s += dGam(l, i, j, k) * vel(p, l) * vel(p, j) * w.slices[t](p, k);
                }
            for (int j = 0; j < m; ++j)
                for (int q = 0; q < m; ++q) s += Gam(i, j, q) * vel(p, j) * inner[q];
            out(p, i) += s;
        }
    }
    return out;
}

DisplacementField second_covariant_time_derivative(const Motion& motion,
                                                   const DisplacementField& w,
                                                   const SpaceChart& chart) {
    if (motion.steps() < 4)
        throw StencilError("second covariant time derivative: need at least 5 time slices");
    DisplacementField out;
    out.slices.resize(motion.slices.size());
    for (int t = 0; t <= motion.steps(); ++t)
        out.slices[t] = second_covariant_time_derivative_slice(motion, w, chart, t);
    return out;
}

double pair_spatial(const BodyGrid& grid, const SpaceChart& chart, const Mat& kappa,
                    const Mat& u, const Mat& w) {
    double s = 0.0;
    for (int p = 0; p < grid.points(); ++p) {
        Mat G = chart.metric(kappa.row(p).transpose());
        s += grid.weight(p) * grid.rho(p) *
             (u.row(p) * G * w.row(p).transpose())(0, 0);
    }
    return s;
}

double pair(const Motion& motion, const SpaceChart& chart, const DisplacementField& u,
            const DisplacementField& w) {
    if (u.slices.size() != motion.slices.size() || w.slices.size() != motion.slices.size())
        throw Error("pair: field slicing does not match the motion");
    const int T = motion.steps();
    if (T == 0) return pair_spatial(motion.grid, chart, motion.slices[0], u.slices[0], w.slices[0]);
    double s = 0.0;
    for (int t = 0; t <= T; ++t) {
        const double wt = (t == 0 || t == T) ? 0.5 : 1.0;
        s += wt * motion.dt *
             pair_spatial(motion.grid, chart, motion.slices[t], u.slices[t], w.slices[t]);
    }
    return s;
}

}  // namespace manidyn

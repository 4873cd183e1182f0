#include "manidyn/geometry.hpp"

#include <cmath>
#include <sstream>

#include "manidyn/errors.hpp"

namespace manidyn {

namespace {

std::string point_str(const Vec& y) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << ")";
    return os.str();
}

void check_in_domain(const SpaceChart& chart, const Vec& y, const char* what) {
    if (!chart.domain.contains(y))
        throw ChartExitError(std::string(what) + ": point " + point_str(y) +
                                 " outside chart domain of " + chart.name,
                             0.0);
}

// 2nd-order first-derivative stencils over a sampled sequence.
Vec d1_sampled(const std::vector<Vec>& f, double dt, int i) {
    const int n = static_cast<int>(f.size());
    if (i > 0 && i < n - 1) return (f[i + 1] - f[i - 1]) / (2.0 * dt);
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
}

struct GeodesicOde {
    const SpaceChart& chart;

    Vec accel(const Vec& y, const Vec& u) const {
        Tensor G = christoffel(chart, y);
        const int m = chart.dim;
        Vec a = Vec::Zero(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) s += G(i, j, k) * u[j] * u[k];
            a[i] = -s;
        }
        return a;
    }
};

}  // namespace

Mat metric_inverse(const SpaceChart& chart, const Vec& y) {
    Mat G = chart.metric(y);
    if (!all_finite(G))
        throw DegenerateMetricError("degenerate metric: non-finite G at " + point_str(y));
    Eigen::FullPivLU<Mat> lu(G);
    if (!lu.isInvertible())
        throw DegenerateMetricError("degenerate metric: singular G at " + point_str(y));
    return lu.inverse();
}

Tensor christoffel(const SpaceChart& chart, const Vec& y) {
    check_in_domain(chart, y, "christoffel");
    const int m = chart.dim;
    Mat Ginv = metric_inverse(chart, y);
    Tensor dG = chart.metric_d1(y);
    Tensor Gamma = Tensor::zeros({m, m, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = j; k < m; ++k) {
                double s = 0.0;
                for (int l = 0; l < m; ++l)
                    s += Ginv(i, l) * (dG(j, l, k) + dG(k, l, j) - dG(l, j, k));
                s *= 0.5;
                Gamma(i, j, k) = s;
                Gamma(i, k, j) = s;
            }
    return Gamma;
}

Tensor christoffel_derivative(const SpaceChart& chart, const Vec& y) {
    const int m = chart.dim;
    if (chart.has_closed_form_second_derivative() && chart.has_closed_form_derivative()) {
        Mat Ginv = metric_inverse(chart, y);
        Tensor dG = chart.metric_d1(y);
        Tensor d2G = chart.metric_d2(y);
        // ∂_p g^{il} = −g^{ia} ∂_p g_{ab} g^{bl}
        Tensor dGinv = Tensor::zeros({m, m, m});
        for (int p = 0; p < m; ++p)
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < m; ++l) {
                    double s = 0.0;
                    for (int a = 0; a < m; ++a)
                        for (int b = 0; b < m; ++b)
                            s += Ginv(i, a) * dG(p, a, b) * Ginv(b, l);
                    dGinv(p, i, l) = -s;
                }
        Tensor dGamma = Tensor::zeros({m, m, m, m});
        for (int p = 0; p < m; ++p)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int k = 0; k < m; ++k) {
                        double s = 0.0;
                        for (int l = 0; l < m; ++l) {
                            s += dGinv(p, i, l) * (dG(j, l, k) + dG(k, l, j) - dG(l, j, k));
                            s += Ginv(i, l) *
                                 (d2G(p, j, l, k) + d2G(p, k, l, j) - d2G(p, l, j, k));
                        }
                        dGamma(p, i, j, k) = 0.5 * s;
                    }
        return dGamma;
    }
    // Finite-difference fallback; needs stencil room inside the chart box.
    const double h = chart.h_G;
    if (chart.domain.min_margin(y) < h)
        throw StencilError("insufficient stencil room for christoffel derivative at " +
                           point_str(y));
    Tensor dGamma = Tensor::zeros({m, m, m, m});
    Vec yp = y, ym = y;
    for (int p = 0; p < m; ++p) {
        yp[p] = y[p] + h;
        ym[p] = y[p] - h;
        Tensor Gp = christoffel(chart, yp);
        Tensor Gm = christoffel(chart, ym);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    dGamma(p, i, j, k) = (Gp(i, j, k) - Gm(i, j, k)) / (2.0 * h);
        yp[p] = y[p];
        ym[p] = y[p];
    }
    return dGamma;
}

Tensor curvature(const SpaceChart& chart, const Vec& y) {
    check_in_domain(chart, y, "curvature");
    const int m = chart.dim;
    if (!chart.has_closed_form_second_derivative() &&
        chart.domain.min_margin(y) < 2.0 * chart.h_G)
        throw StencilError("insufficient stencil room for curvature at " + point_str(y));
    Tensor Gamma = christoffel(chart, y);
    Tensor dGamma = christoffel_derivative(chart, y);
    Tensor R = Tensor::zeros({m, m, m, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    double s = dGamma(k, i, l, j) - dGamma(l, i, k, j);
                    for (int p = 0; p < m; ++p)
                        s += Gamma(i, k, p) * Gamma(p, l, j) - Gamma(i, l, p) * Gamma(p, k, j);
                    R(i, j, k, l) = s;
                }
    return R;
}

Vec curvature_action(const Tensor& R, const Vec& X, const Vec& Y, const Vec& Z) {
    const int m = static_cast<int>(X.size());
    Vec out = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) s += R(i, j, k, l) * X[k] * Y[l] * Z[j];
        out[i] = s;
    }
    return out;
}

GeodesicState exp_map(const SpaceChart& chart, const GeodesicState& state, int steps) {
    check_in_domain(chart, state.position, "exp_map");
    GeodesicOde ode{chart};
    const double h = 1.0 / steps;
    Vec y = state.position;
    Vec u = state.velocity;
    for (int n = 0; n < steps; ++n) {
        const Vec k1y = u;
        const Vec k1u = ode.accel(y, u);
        const Vec k2y = u + 0.5 * h * k1u;
        const Vec k2u = ode.accel(y + 0.5 * h * k1y, u + 0.5 * h * k1u);
        const Vec k3y = u + 0.5 * h * k2u;
        const Vec k3u = ode.accel(y + 0.5 * h * k2y, u + 0.5 * h * k2u);
        const Vec k4y = u + h * k3u;
        const Vec k4u = ode.accel(y + h * k3y, u + h * k3u);
        y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        if (!chart.domain.contains(y))
            throw ChartExitError("chart exit: geodesic left " + chart.name + " at parameter " +
                                     std::to_string((n + 1) * h),
                                 (n + 1) * h);
    }
    return {y, u};
}

JacobiResult jacobi_field(const SpaceChart& chart, const Vec& y, const Vec& v, const Vec& w,
                          double s, int steps) {
    check_in_domain(chart, y, "jacobi_field");
    const int m = chart.dim;
    // State: geodesic (y,u) plus Jacobi field (J, K = DJ/ds), integrated in
    // coordinates:
    //   J' = K − Γ(u, J),   K' = −R(J,u)u − Γ(u, K).
    struct State {
        Vec y, u, J, K;
    };
    auto rhs = [&](const State& st) {
        Tensor Gam = christoffel(chart, st.y);
        Tensor R = curvature(chart, st.y);
        State d;
        d.y = st.u;
        d.u = Vec::Zero(m);
        d.J = st.K;
        d.K = -curvature_action(R, st.J, st.u, st.u);
        for (int i = 0; i < m; ++i) {
            double au = 0.0, aJ = 0.0, aK = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    au += Gam(i, j, k) * st.u[j] * st.u[k];
                    aJ += Gam(i, j, k) * st.u[j] * st.J[k];
                    aK += Gam(i, j, k) * st.u[j] * st.K[k];
                }
            d.u[i] = -au;
            d.J[i] -= aJ;
            d.K[i] -= aK;
        }
        return d;
    };
    auto axpy = [](const State& a, double h, const State& b) {
        return State{a.y + h * b.y, a.u + h * b.u, a.J + h * b.J, a.K + h * b.K};
    };
    State st{y, v, Vec::Zero(m), w};
    const double h = s / steps;
    for (int n = 0; n < steps; ++n) {
        State k1 = rhs(st);
        State k2 = rhs(axpy(st, 0.5 * h, k1));
        State k3 = rhs(axpy(st, 0.5 * h, k2));
        State k4 = rhs(axpy(st, h, k3));
        st.y += (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        st.u += (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        st.J += (h / 6.0) * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
        st.K += (h / 6.0) * (k1.K + 2.0 * k2.K + 2.0 * k3.K + k4.K);
        if (!chart.domain.contains(st.y))
            throw ChartExitError("chart exit: Jacobi geodesic left " + chart.name +
                                     " at parameter " + std::to_string((n + 1) * h),
                                 (n + 1) * h);
    }
    return {st.J, st.K, GeodesicState{st.y, st.u}};
}

Vec parallel_transport(const SpaceChart& chart, const Vec& y, const Vec& v, const Vec& u0,
                       int steps) {
    const int m = chart.dim;
    struct State {
        Vec y, u, w;
    };
    auto rhs = [&](const State& st) {
        Tensor Gam = christoffel(chart, st.y);
        State d;
        d.y = st.u;
        d.u = Vec::Zero(m);
        d.w = Vec::Zero(m);
        for (int i = 0; i < m; ++i) {
            double au = 0.0, aw = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    au += Gam(i, j, k) * st.u[j] * st.u[k];
                    aw += Gam(i, j, k) * st.u[j] * st.w[k];
                }
            d.u[i] = -au;
            d.w[i] = -aw;
        }
        return d;
    };
    auto axpy = [](const State& a, double h, const State& b) {
        return State{a.y + h * b.y, a.u + h * b.u, a.w + h * b.w};
    };
    State st{y, v, u0};
    const double h = 1.0 / steps;
    for (int n = 0; n < steps; ++n) {
        State k1 = rhs(st);
        State k2 = rhs(axpy(st, 0.5 * h, k1));
        State k3 = rhs(axpy(st, 0.5 * h, k2));
        State k4 = rhs(axpy(st, h, k3));
        st.y += (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        st.u += (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        st.w += (h / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
        if (!chart.domain.contains(st.y))
            throw ChartExitError("chart exit during parallel transport", (n + 1) * h);
    }
    return st.w;
}

Vec transport_covector_to_base(const SpaceChart& chart, const Vec& y, const Vec& v,
                               const Vec& lambda_at_end, int steps) {
    const int m = chart.dim;
    GeodesicState end = exp_map(chart, {y, v}, steps);
    // Walk the reversed geodesic (same trace, opposite velocity) carrying the
    // co-vector with λ̇_j = Γ^k_{ij} γ̇^i λ_k.
    struct State {
        Vec y, u, l;
    };
    auto rhs = [&](const State& st) {
        Tensor Gam = christoffel(chart, st.y);
        State d;
        d.y = st.u;
        d.u = Vec::Zero(m);
        d.l = Vec::Zero(m);
        for (int i = 0; i < m; ++i) {
            double au = 0.0;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) au += Gam(i, j, k) * st.u[j] * st.u[k];
            d.u[i] = -au;
        }
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k) s += Gam(k, i, j) * st.u[i] * st.l[k];
            d.l[j] = s;
        }
        return d;
    };
    auto axpy = [](const State& a, double h, const State& b) {
        return State{a.y + h * b.y, a.u + h * b.u, a.l + h * b.l};
    };
    State st{end.position, -end.velocity, lambda_at_end};
    const double h = 1.0 / steps;
    for (int n = 0; n < steps; ++n) {
        State k1 = rhs(st);
        State k2 = rhs(axpy(st, 0.5 * h, k1));
        State k3 = rhs(axpy(st, 0.5 * h, k2));
        State k4 = rhs(axpy(st, h, k3));
        st.y += (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
        st.u += (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        st.l += (h / 6.0) * (k1.l + 2.0 * k2.l + 2.0 * k3.l + k4.l);
    }
    return st.l;
}

PathDerivative covariant_derivative_along_path(const SpaceChart& chart,
                                               const std::vector<Vec>& path,
                                               const std::vector<Vec>& field, double dt,
                                               int index) {
    if (path.size() != field.size() || path.size() < 3)
        throw StencilError("covariant_derivative_along_path: need >= 3 matching samples");
    const int n = static_cast<int>(path.size());
    if (index < 0 || index >= n)
        throw StencilError("covariant_derivative_along_path: index out of range");
    const Vec& y = path[index];
    check_in_domain(chart, y, "covariant_derivative_along_path");
    Vec ydot = d1_sampled(path, dt, index);
    Vec udot = d1_sampled(field, dt, index);
    Tensor Gam = christoffel(chart, y);
    const int m = chart.dim;
    Vec out = udot;
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) s += Gam(i, j, k) * ydot[j] * field[index][k];
        out[i] += s;
    }
    return {out, 2};
}

}  // namespace manidyn

#include "manidyn/oracle.hpp"

#include <cmath>
#include <random>

#include "manidyn/errors.hpp"
#include "manidyn/geometry.hpp"

namespace manidyn {

double fit_slope(const std::vector<double>& steps, const std::vector<double>& defects) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (defects[i] > 1e-300 && std::isfinite(defects[i])) {
            lx.push_back(std::log(steps[i]));
            ly.push_back(std::log(defects[i]));
        }
    }
    if (lx.size() < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Oracle-local geodesic machinery. These deliberately do not reuse the
// integrators in geometry.cpp; the only shared ingredient is the chart
// (metric and connection coefficients).
// ---------------------------------------------------------------------------

namespace {

Vec gamma_contract(const Tensor& Gam, const Vec& a, const Vec& b) {
    const int m = static_cast<int>(a.size());
    Vec out = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) s += Gam(i, j, k) * a[j] * b[k];
        out[i] = s;
    }
    return out;
}

struct OExp {
    Vec y, u;
};

OExp o_exp(const SpaceChart& chart, const Vec& y0, const Vec& v0, int steps) {
    Vec y = y0, u = v0;
    const double h = 1.0 / steps;
    for (int n = 0; n < steps; ++n) {
        auto f = [&](const Vec& yy, const Vec& uu) {
            return std::pair<Vec, Vec>(uu, -gamma_contract(christoffel(chart, yy), uu, uu));
        };
        auto [k1y, k1u] = f(y, u);
        auto [k2y, k2u] = f(y + 0.5 * h * k1y, u + 0.5 * h * k1u);
        auto [k3y, k3u] = f(y + 0.5 * h * k2y, u + 0.5 * h * k2u);
        auto [k4y, k4u] = f(y + h * k3y, u + h * k3u);
        y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        if (!chart.domain.contains(y))
            throw ChartExitError("chart exit at perturbed configuration", (n + 1) * h);
    }
    return {y, u};
}

// Jacobi field value J(1) along exp(t v), J(0)=0, DJ/dt(0)=w, together with
// the endpoint.
struct OJacobi {
    Vec J;
    Vec y_end;
};

OJacobi o_jacobi(const SpaceChart& chart, const Vec& y0, const Vec& v0, const Vec& w,
                 int steps) {
    const int m = chart.dim;
    Vec y = y0, u = v0, J = Vec::Zero(m), K = w;
    const double h = 1.0 / steps;
    for (int n = 0; n < steps; ++n) {
        auto f = [&](const Vec& yy, const Vec& uu, const Vec& JJ, const Vec& KK) {
            Tensor Gam = christoffel(chart, yy);
            Tensor R = curvature(chart, yy);
            Vec dy = uu;
            Vec du = -gamma_contract(Gam, uu, uu);
            Vec dJ = KK - gamma_contract(Gam, uu, JJ);
            Vec dK = -curvature_action(R, JJ, uu, uu) - gamma_contract(Gam, uu, KK);
            return std::array<Vec, 4>{dy, du, dJ, dK};
        };
        auto k1 = f(y, u, J, K);
        auto k2 = f(y + 0.5 * h * k1[0], u + 0.5 * h * k1[1], J + 0.5 * h * k1[2],
                    K + 0.5 * h * k1[3]);
        auto k3 = f(y + 0.5 * h * k2[0], u + 0.5 * h * k2[1], J + 0.5 * h * k2[2],
                    K + 0.5 * h * k2[3]);
        auto k4 = f(y + h * k3[0], u + h * k3[1], J + h * k3[2], K + h * k3[3]);
        y += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        u += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        J += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        K += (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
        if (!chart.domain.contains(y))
            throw ChartExitError("chart exit in Jacobi sampling", (n + 1) * h);
    }
    return {J, y};
}

// Co-vector transport from exp(v) back to the base point along the reversed
// geodesic: λ̇_j = Γ^k_{ij} γ̇^i λ_k.
Vec o_covector_back(const SpaceChart& chart, const Vec& y0, const Vec& v0,
                    const Vec& lambda_end, int steps) {
    const int m = chart.dim;
    OExp end = o_exp(chart, y0, v0, steps);
    Vec y = end.y, u = -end.u, l = lambda_end;
    const double h = 1.0 / steps;
    auto ldot = [&](const Vec& yy, const Vec& uu, const Vec& ll) {
        Tensor Gam = christoffel(chart, yy);
        Vec out = Vec::Zero(m);
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k) s += Gam(k, i, j) * uu[i] * ll[k];
            out[j] = s;
        }
        return out;
    };
    for (int n = 0; n < steps; ++n) {
        auto f = [&](const Vec& yy, const Vec& uu, const Vec& ll) {
            return std::array<Vec, 3>{uu, -gamma_contract(christoffel(chart, yy), uu, uu),
                                      ldot(yy, uu, ll)};
        };
        auto k1 = f(y, u, l);
        auto k2 = f(y + 0.5 * h * k1[0], u + 0.5 * h * k1[1], l + 0.5 * h * k1[2]);
        auto k3 = f(y + 0.5 * h * k2[0], u + 0.5 * h * k2[1], l + 0.5 * h * k2[2]);
        auto k4 = f(y + h * k3[0], u + h * k3[1], l + h * k3[2]);
        y += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        u += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        l += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    }
    return l;
}

constexpr int kPerturbSteps = 8;  // perturbation geodesics are short

Motion perturbed_motion(const Motion& motion, const DisplacementField& w,
                        const SpaceChart& chart, double s) {
    Motion out{motion.grid, motion.dt, {}};
    out.slices.reserve(motion.slices.size());
    for (std::size_t t = 0; t < motion.slices.size(); ++t) {
        Mat slice(motion.slices[t].rows(), motion.slices[t].cols());
        for (int p = 0; p < motion.grid.points(); ++p) {
            Vec v = s * w.slices[t].row(p).transpose();
            slice.row(p) =
                o_exp(chart, motion.slices[t].row(p).transpose(), v, kPerturbSteps).y.transpose();
        }
        out.slices.push_back(std::move(slice));
    }
    return out;
}

FdDerivative residual_at_perturbed(const Motion& motion, const DisplacementField& w,
                                   const ConstitutiveDensity& cd, const SpaceChart& chart,
                                   const BodyGrid& grid, int t, double s, TransportMode mode,
                                   const LoadingDensity& load) {
    Motion pert = perturbed_motion(motion, w, chart, s);
    Mat r = interior_residual(pert, cd, load, grid, chart, t);
    BoundaryField b = boundary_residual(pert, cd, load, grid, chart, t);
    if (mode == TransportMode::parallel) {
        for (int p = 0; p < grid.points(); ++p) {
            Vec v = s * w.slices[static_cast<std::size_t>(t)].row(p).transpose();
            r.row(p) = o_covector_back(chart, motion.slices[static_cast<std::size_t>(t)]
                                                  .row(p)
                                                  .transpose(),
                                       v, r.row(p).transpose(), kPerturbSteps)
                           .transpose();
        }
        for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
            const Face& f = grid.faces()[fi];
            for (std::size_t k = 0; k < f.points.size(); ++k) {
                const int p = f.points[k];
                Vec v = s * w.slices[static_cast<std::size_t>(t)].row(p).transpose();
                b.values[fi].row(static_cast<Eigen::Index>(k)) =
                    o_covector_back(chart,
                                    motion.slices[static_cast<std::size_t>(t)]
                                        .row(p)
                                        .transpose(),
                                    v, b.values[fi].row(static_cast<Eigen::Index>(k)).transpose(),
                                    kPerturbSteps)
                        .transpose();
            }
        }
    }
    return {std::move(r), std::move(b)};
}

}  // namespace

FdDerivative fd_force_derivative(const Motion& motion, const DisplacementField& w,
                                 const ConstitutiveDensity& cd, const SpaceChart& chart,
                                 const BodyGrid& grid, int t, double eps, TransportMode mode,
                                 const LoadingDensity& load) {
    bool w_zero = true;
    for (const Mat& s : w.slices)
        if (s.cwiseAbs().maxCoeff() != 0.0) {
            w_zero = false;
            break;
        }
    if (w_zero) {
        FdDerivative out;
        out.interior = Mat::Zero(grid.points(), motion.space_dim());
        for (const Face& f : grid.faces())
            out.boundary.values.push_back(
                Mat::Zero(static_cast<Eigen::Index>(f.points.size()), motion.space_dim()));
        return out;
    }
    FdDerivative plus =
        residual_at_perturbed(motion, w, cd, chart, grid, t, eps, mode, load);
    FdDerivative minus =
        residual_at_perturbed(motion, w, cd, chart, grid, t, -eps, mode, load);
    FdDerivative out;
    out.interior = (plus.interior - minus.interior) / (2.0 * eps);
    for (std::size_t fi = 0; fi < plus.boundary.values.size(); ++fi)
        out.boundary.values.push_back(
            (plus.boundary.values[fi] - minus.boundary.values[fi]) / (2.0 * eps));
    return out;
}

FdDerivative transported_residual(const Motion& motion, const DisplacementField& w,
                                  const ConstitutiveDensity& cd, const SpaceChart& chart,
                                  const BodyGrid& grid, int t, TransportMode mode,
                                  const LoadingDensity& load) {
    return residual_at_perturbed(motion, w, cd, chart, grid, t, 1.0, mode, load);
}

// ---------------------------------------------------------------------------
// Random smooth fields
// ---------------------------------------------------------------------------

Mat random_smooth_slice(const BodyGrid& grid, int m, double amplitude, std::uint32_t seed,
                        int modes) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Mat out = Mat::Zero(grid.points(), m);
    for (int i = 0; i < m; ++i) {
        if (grid.dim() == 1) {
            for (int k = 1; k <= modes; ++k) {
                const double a = uni(rng) / k, b = uni(rng) / k;
                for (int p = 0; p < grid.points(); ++p) {
                    const double x = grid.coord(p)[0];
                    out(p, i) += a * std::sin(k * M_PI * x) + b * std::cos(k * M_PI * x);
                }
            }
        } else {
            const int mx2 = std::max(1, modes - 1);
            for (int k = 1; k <= mx2; ++k)
                for (int l = 1; l <= mx2; ++l) {
                    const double a = uni(rng) / (k + l), b = uni(rng) / (k + l);
                    for (int p = 0; p < grid.points(); ++p) {
                        Vec x = grid.coord(p);
                        out(p, i) += a * std::sin(k * M_PI * x[0]) * std::sin(l * M_PI * x[1]) +
                                     b * std::cos(k * M_PI * x[0]) * std::cos(l * M_PI * x[1]);
                    }
                }
        }
    }
    const double mx = out.cwiseAbs().maxCoeff();
    if (mx > 0.0) out *= amplitude / mx;
    return out;
}

DisplacementField random_smooth_displacement(const BodyGrid& grid, int m, int slices,
                                             double dt, double amplitude, std::uint32_t seed,
                                             int modes) {
    Mat f1 = random_smooth_slice(grid, m, amplitude, seed, modes);
    Mat f2 = random_smooth_slice(grid, m, amplitude, seed + 17, modes);
    DisplacementField w;
    w.slices.reserve(static_cast<std::size_t>(slices));
    for (int t = 0; t < slices; ++t) {
        const double tt = t * dt;
        w.slices.push_back(f1 * std::cos(0.9 * M_PI * tt) +
                           f2 * std::sin(1.7 * M_PI * tt + 0.4));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Metricity
// ---------------------------------------------------------------------------

namespace {

// Smooth map of the unit box into the interior of the chart, plus a scale on
// which perturbation fields stay inside.
std::pair<Mat, double> base_configuration(const SpaceChart& chart, const BodyGrid& grid,
                                          std::uint32_t seed) {
    const int m = chart.dim;
    Vec center(m), span(m);
    for (int i = 0; i < m; ++i) {
        const double lo = chart.domain.lo[i], hi = chart.domain.hi[i];
        center[i] = 0.5 * (lo + hi);
        if (hi - lo > 10.0) center[i] = std::min(std::max(0.0, lo + 1.0), hi - 1.0);
        span[i] = std::min(0.4, 0.15 * (hi - lo));
    }
    // Special-case the sphere chart so samples sit near the equator where the
    // metric is far from degenerate.
    if (chart.name == "sphere") {
        center[0] = M_PI / 2.0;
        center[1] = 0.0;
    }
    Mat wiggle = random_smooth_slice(grid, m, 1.0, seed);
    Mat phi(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        Vec x = grid.coord(p);
        for (int i = 0; i < m; ++i) {
            const double lin = x[i % grid.dim()] - 0.5;
            phi(p, i) = center[i] + span[i] * (0.6 * lin + 0.4 * wiggle(p, i));
        }
    }
    return {phi, span.minCoeff()};
}

}  // namespace

DefectReport metricity_defect(const SpaceChart& chart, const BodyGrid& grid, int samples,
                              int levels, std::uint32_t seed, double eps0, int steps0) {
    DefectReport rep;
    rep.name = "metricity[" + chart.name + "]";
    rep.samples = samples;
    rep.nominal_slope = 2.0;
    const int m = chart.dim;

    for (int lev = 0; lev < levels; ++lev) {
        const double eps = eps0 / std::pow(2.0, lev);
        const int steps = steps0 * (1 << lev);
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            const std::uint32_t sd = seed + 1000 * static_cast<std::uint32_t>(s);
            auto [phi, scale] = base_configuration(chart, grid, sd);
            Mat eta = random_smooth_slice(grid, m, 0.8 * scale, sd + 1);
            Mat u = random_smooth_slice(grid, m, 1.0, sd + 2);
            Mat w = random_smooth_slice(grid, m, 1.0, sd + 3);
            auto pairing = [&](double sval) {
                double acc = 0.0;
                for (int p = 0; p < grid.points(); ++p) {
                    Vec y = phi.row(p).transpose();
                    Vec e = sval * eta.row(p).transpose();
                    OJacobi Ju = o_jacobi(chart, y, e, u.row(p).transpose(), steps);
                    OJacobi Jw = o_jacobi(chart, y, e, w.row(p).transpose(), steps);
                    Mat G = chart.metric(Ju.y_end);
                    acc += grid.weight(p) * grid.rho(p) *
                           (Ju.J.transpose() * G * Jw.J)(0, 0);
                }
                return acc;
            };
            const double derivative = (pairing(eps) - pairing(-eps)) / (2.0 * eps);
            worst = std::max(worst, std::abs(derivative));
        }
        rep.level_steps.push_back(eps);
        rep.level_defects.push_back(worst);
        rep.max_defect = std::max(rep.max_defect, worst);
    }
    rep.convergence_slope = fit_slope(rep.level_steps, rep.level_defects);
    if (rep.max_defect < 1e-13) rep.convergence_slope = rep.nominal_slope;  // roundoff floor
    return rep;
}

DefectReport jacobi_scaling_defect(const SpaceChart& chart, const Vec& y, const Vec& v,
                                   const Vec& w, int levels, int steps0) {
    DefectReport rep;
    rep.name = "jacobi-scaling[" + chart.name + "]";
    rep.nominal_slope = 4.0;
    const double ts[] = {0.3, 0.6, 0.9};
    const double ss[] = {0.25, 0.5, 0.75, 1.0};
    rep.samples = 12;
    for (int lev = 0; lev < levels; ++lev) {
        const int steps = steps0 * (1 << lev);
        double worst = 0.0;
        for (double t : ts)
            for (double s : ss) {
                JacobiResult a = jacobi_field(chart, y, t * v, w, s, steps);
                JacobiResult b = jacobi_field(chart, y, v, w / t, t * s, steps);
                Mat G = chart.metric(a.geodesic.position);
                Vec diff = a.value - b.value;
                worst = std::max(worst, std::sqrt((diff.transpose() * G * diff)(0, 0)));
            }
        rep.level_steps.push_back(1.0 / steps);
        rep.level_defects.push_back(worst);
        rep.max_defect = std::max(rep.max_defect, worst);
    }
    rep.convergence_slope = fit_slope(rep.level_steps, rep.level_defects);
    if (rep.max_defect < 1e-13) rep.convergence_slope = rep.nominal_slope;
    return rep;
}

// ---------------------------------------------------------------------------
// Normal-coordinate Jacobi check
// ---------------------------------------------------------------------------

namespace {

// G(y)-orthonormal frame from the coordinate basis (Gram–Schmidt); columns
// are the frame vectors in chart components.
Mat gram_schmidt_frame(const SpaceChart& chart, const Vec& y) {
    const int m = chart.dim;
    Mat G = chart.metric(y);
    Mat E = Mat::Identity(m, m);
    for (int i = 0; i < m; ++i) {
        Vec e = E.col(i);
        for (int j = 0; j < i; ++j) {
            const double proj = (E.col(j).transpose() * G * e)(0, 0);
            e -= proj * E.col(j);
        }
        const double nrm = std::sqrt((e.transpose() * G * e)(0, 0));
        E.col(i) = e / nrm;
    }
    return E;
}

// Inverse exponential map by Newton shooting with a differenced Jacobian.
Vec shoot_log(const SpaceChart& chart, const Vec& y, const Vec& z, int steps) {
    const int m = chart.dim;
    Vec u = z - y;
    for (int it = 0; it < 50; ++it) {
        Vec r = o_exp(chart, y, u, steps).y - z;
        if (r.norm() < 1e-13) return u;
        Mat Jm(m, m);
        const double d = 1e-6;
        for (int j = 0; j < m; ++j) {
            Vec up = u, um = u;
            up[j] += d;
            um[j] -= d;
            Jm.col(j) = (o_exp(chart, y, up, steps).y - o_exp(chart, y, um, steps).y) / (2.0 * d);
        }
        u -= Jm.fullPivLu().solve(r);
    }
    throw ShootingError("shooting non-convergence in normal-coordinate inversion");
}

}  // namespace

DefectReport normal_coordinate_jacobi_check(const SpaceChart& chart, const Vec& y,
                                            const Vec& v, const Vec& w, int levels, double t0,
                                            int steps) {
    DefectReport rep;
    rep.name = "normal-coordinate-jacobi[" + chart.name + "]";
    rep.nominal_slope = 3.0;
    rep.samples = levels;
    const int m = chart.dim;
    Mat E = gram_schmidt_frame(chart, y);
    Mat Einv = E.fullPivLu().inverse();
    Vec w_nc = Einv * w;
    for (int lev = 0; lev < levels; ++lev) {
        const double t = t0 / std::pow(2.0, lev);
        JacobiResult J = jacobi_field(chart, y, v, w, t, steps);
        const Vec z = J.geodesic.position;
        auto ncoords = [&](const Vec& zz) { return Vec(Einv * shoot_log(chart, y, zz, steps)); };
        Mat M(m, m);
        const double d = 1e-6;
        for (int j = 0; j < m; ++j) {
            Vec zp = z, zm = z;
            zp[j] += d;
            zm[j] -= d;
            M.col(j) = (ncoords(zp) - ncoords(zm)) / (2.0 * d);
        }
        Vec J_nc = M * J.value;
        rep.level_steps.push_back(t);
        rep.level_defects.push_back((J_nc - t * w_nc).norm());
        rep.max_defect = std::max(rep.max_defect, rep.level_defects.back());
    }
    rep.convergence_slope = fit_slope(rep.level_steps, rep.level_defects);
    if (rep.max_defect < 1e-12) rep.convergence_slope = rep.nominal_slope;
    return rep;
}

}  // namespace manidyn

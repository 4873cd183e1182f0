#include "manidyn/dynamics.hpp"

#include <cmath>

#include "manidyn/errors.hpp"
#include "manidyn/geometry.hpp"

namespace manidyn {

Mat interior_residual(const Motion& motion, const ConstitutiveDensity& cd,
                      const LoadingDensity& load, const BodyGrid& grid,
                      const SpaceChart& chart, int t, DivergencePath path) {
    const int m = motion.space_dim();
    Mat acc = acceleration_slice(motion, chart, t);
    Jet1Field J = jet(motion, t);
    Mat div = stress_divergence(cd, grid, J, path);
    Mat r(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        Vec y = J.y.row(p).transpose();
        Mat G = chart.metric(y);
        const double rho = grid.rho(p);
        Vec b = load.body_at(grid.coord(p), y, m);
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += G(i, j) * acc(p, i);
            r(p, j) = rho * s - rho * b[j] - div(p, j);
        }
    }
    return r;
}

BoundaryField boundary_residual(const Motion& motion, const ConstitutiveDensity& cd,
                                const LoadingDensity& load, const BodyGrid& grid,
                                const SpaceChart& chart, int t) {
    (void)chart;
    Jet1Field J = jet(motion, t);
    TractionField tr = traction(cd, grid, J);
    BoundaryField out = tr.contracted;
    if (load.has_surface()) {
        for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
            const Face& f = grid.faces()[fi];
            for (std::size_t k = 0; k < f.points.size(); ++k) {
                const int p = f.points[k];
                Vec T = load.surface(grid.coord(p), J.y.row(p).transpose());
                out.values[fi].row(static_cast<Eigen::Index>(k)) -= T.transpose();
            }
        }
    }
    return out;
}

ResidualField equilibrium_residual(const Mat& phi, const ConstitutiveDensity& cd,
                                   const LoadingDensity& load, const BodyGrid& grid,
                                   const SpaceChart& chart, DivergencePath path) {
    (void)chart;
    const int m = static_cast<int>(phi.cols());
    Jet1Field J = jet_of_slice(grid, phi);
    Mat div = stress_divergence(cd, grid, J, path);
    ResidualField out;
    out.interior.resize(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        Vec y = phi.row(p).transpose();
        Vec b = load.body_at(grid.coord(p), y, m);
        for (int j = 0; j < m; ++j)
            out.interior(p, j) = -grid.rho(p) * b[j] - div(p, j);
    }
    TractionField tr = traction(cd, grid, J);
    out.boundary = tr.contracted;
    if (load.has_surface()) {
        for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
            const Face& f = grid.faces()[fi];
            for (std::size_t k = 0; k < f.points.size(); ++k) {
                const int p = f.points[k];
                Vec T = load.surface(grid.coord(p), phi.row(p).transpose());
                out.boundary.values[fi].row(static_cast<Eigen::Index>(k)) -= T.transpose();
            }
        }
    }
    return out;
}

namespace {

// Semi-discrete force: a^i = −Γ^i_{lk} v^l v^k + ρ⁻¹ G^{ij} [(divS)_j + ρ b_j].
Mat semi_discrete_accel(const Mat& kappa, const Mat& v, const ConstitutiveDensity& cd,
                        const LoadingDensity& load, const BodyGrid& grid,
                        const SpaceChart& chart) {
    const int m = static_cast<int>(kappa.cols());
    Jet1Field J = jet_of_slice(grid, kappa);
    Mat div = stress_divergence(cd, grid, J, DivergencePath::composed);
    Mat acc(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        Vec y = kappa.row(p).transpose();
        if (!chart.domain.contains(y))
            throw ChartExitError("simulate: configuration left the chart", 0.0);
        Tensor Gam = christoffel(chart, y);
        Mat Ginv = metric_inverse(chart, y);
        const double rho = grid.rho(p);
        Vec b = load.body_at(grid.coord(p), y, m);
        Vec force = Vec::Zero(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += Ginv(i, j) * (div(p, j) / rho + b[j]);
            force[i] = s;
            for (int l = 0; l < m; ++l)
                for (int k = 0; k < m; ++k) force[i] -= Gam(i, l, k) * v(p, l) * v(p, k);
        }
        acc.row(p) = force.transpose();
    }
    return acc;
}

}  // namespace

Motion simulate(const Mat& phi0, const Mat& v0, const ConstitutiveDensity& cd,
                const LoadingDensity& load, const BodyGrid& grid, const SpaceChart& chart,
                double dt, int steps, const SimulateOptions& opts) {
    Motion motion{grid, dt, {}};
    motion.slices.reserve(static_cast<std::size_t>(steps) + 1);
    motion.slices.push_back(phi0);

    // Taylor start keeps the first step second order.
    Mat a0 = semi_discrete_accel(phi0, v0, cd, load, grid, chart);
    Mat first = phi0 + dt * v0 + 0.5 * dt * dt * a0;
    if (opts.clamp_boundary)
        for (int p = 0; p < grid.points(); ++p)
            if (grid.is_boundary(p)) first.row(p) = phi0.row(p);
    motion.slices.push_back(first);

    for (int n = 1; n < steps; ++n) {
        const Mat& prev = motion.slices[static_cast<std::size_t>(n) - 1];
        const Mat& cur = motion.slices[static_cast<std::size_t>(n)];
        // Fixed-point closure of the central velocity in the Γ-term.
        Mat v = (cur - prev) / dt;
        Mat next;
        for (int it = 0; it < opts.picard_iterations; ++it) {
            Mat a = semi_discrete_accel(cur, v, cd, load, grid, chart);
            next = 2.0 * cur - prev + dt * dt * a;
            v = (next - prev) / (2.0 * dt);
        }
        if (opts.clamp_boundary)
            for (int p = 0; p < grid.points(); ++p)
                if (grid.is_boundary(p)) next.row(p) = phi0.row(p);
        if (next.cwiseAbs().maxCoeff() > opts.blowup_bound ||
            v.cwiseAbs().maxCoeff() > opts.blowup_bound || !all_finite(next))
            throw UnstableStepError("unstable step at time index " + std::to_string(n + 1),
                                    n + 1);
        motion.slices.push_back(std::move(next));
    }
    return motion;
}

double energy(const Motion& motion, const HyperelasticLagrangian& lag, const BodyGrid& grid,
              const SpaceChart& chart, int t) {
    Mat v = velocity_slice(motion, t);
    Jet1Field J = jet(motion, t);
    Vec density(grid.points());
    for (int p = 0; p < grid.points(); ++p) {
        Mat G = chart.metric(J.y.row(p).transpose());
        DensityArg a{&grid, p, J.y.row(p).transpose(), J.first[p]};
        density[p] = 0.5 * (v.row(p) * G * v.row(p).transpose())(0, 0) + lag.value(a);
    }
    return grid.integrate_mass(density);
}

}  // namespace manidyn

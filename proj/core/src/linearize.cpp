#include "manidyn/linearize.hpp"

#include <Eigen/LU>

#include "manidyn/errors.hpp"
#include "manidyn/geometry.hpp"

namespace manidyn {

LinearizedCoefficients coefficient_fields(const Mat& phi, const ConstitutiveDensity& cd,
                                          const SpaceChart& chart, const BodyGrid& grid,
                                          DivergencePath divergence) {
    const int d = cd.body_dim();
    const int m = cd.space_dim();
    if (!cd.has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Jet1Field J = jet_of_slice(grid, phi);

    LinearizedCoefficients out;
    out.A1.resize(grid.points());
    out.A2.resize(grid.points());
    out.A3.resize(grid.points());
    out.div_psi = stress_divergence(cd, grid, J, divergence);

    for (int p = 0; p < grid.points(); ++p) {
        DensityArg a{&grid, p, J.y.row(p).transpose(), J.first[p]};
        const Mat& A = J.first[p];
        const Tensor& Axx = J.second[static_cast<std::size_t>(p)];

        Mat yx = cd.d2psi_dydx_contracted(a);
        Tensor Ax = cd.d2psi_dAdx_contracted(a);
        Tensor yy = cd.d2psi_dydy(a);
        Tensor yA = cd.d2psi_dydA(a);
        Tensor AA = cd.d2psi_dAdA(a);
        Tensor py = cd.dpsi_dy(a);
        Tensor pA = cd.dpsi_dA(a);
        Mat Ry = cd.dR_dy(a);
        Tensor RA = cd.dR_dA(a);

        Mat A1(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double s = yx(j, i) - Ry(j, i);
                for (int al = 0; al < d; ++al)
                    for (int l = 0; l < m; ++l) {
                        s += yy(al, j, i, l) * A(l, al);
                        for (int be = 0; be < d; ++be)
                            s += yA(al, j, i, l, be) * Axx(l, al, be);
                    }
                A1(i, j) = s;
            }

        Tensor A2 = Tensor::zeros({d, m, m});
        for (int de = 0; de < d; ++de)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double s = Ax(j, i, de) + py(de, j, i) - RA(j, i, de);
                    for (int al = 0; al < d; ++al)
                        for (int l = 0; l < m; ++l) {
                            s += yA(al, j, l, i, de) * A(l, al);
                            for (int be = 0; be < d; ++be)
                                s += AA(al, j, i, de, l, be) * Axx(l, al, be);
                        }
                    A2(de, i, j) = s;
                }

        Tensor A3 = Tensor::zeros({d, d, m, m});
        for (int al = 0; al < d; ++al)
            for (int be = 0; be < d; ++be)
                for (int l = 0; l < m; ++l)
                    for (int j = 0; j < m; ++j) A3(al, be, l, j) = pA(al, j, l, be);

        if (!all_finite(A1) || !std::isfinite(A2.max_abs()) || !std::isfinite(A3.max_abs()))
            throw Error("coefficient_fields: non-finite coefficients at grid point " +
                        std::to_string(p));

        out.A1[static_cast<std::size_t>(p)] = std::move(A1);
        out.A2[static_cast<std::size_t>(p)] = std::move(A2);
        out.A3[static_cast<std::size_t>(p)] = std::move(A3);
    }

    for (const Face& f : grid.faces()) {
        std::vector<Mat> psis;
        std::vector<Tensor> dys, dAs, gammas;
        for (int p : f.points) {
            DensityArg a{&grid, p, J.y.row(p).transpose(), J.first[p]};
            psis.push_back(cd.psi(a));
            dys.push_back(cd.dpsi_dy(a));
            dAs.push_back(cd.dpsi_dA(a));
            gammas.push_back(christoffel(chart, J.y.row(p).transpose()));
        }
        out.boundary_psi.push_back(std::move(psis));
        out.boundary_dpsi_dy.push_back(std::move(dys));
        out.boundary_dpsi_dA.push_back(std::move(dAs));
        out.boundary_gamma.push_back(std::move(gammas));
    }
    return out;
}

Mat inertial_linearization_slice(const Motion& motion, const DisplacementField& w,
                                 const SpaceChart& chart, int t, CurvatureSlot slot) {
    const int m = motion.space_dim();
    Mat out = second_covariant_time_derivative_slice(motion, w, chart, t);
    Mat vel = velocity_slice(motion, t);
    // Curvature term; the displacement slot is the implemented reading,
    // the ∂_t w slot is the falsification variant.
    Mat wslot;
    if (slot == CurvatureSlot::displacement) {
        wslot = w.slices[static_cast<std::size_t>(t)];
    } else {
        const auto& ws = w.slices;
        const int n = static_cast<int>(ws.size());
        if (t > 0 && t < n - 1)
            wslot = (ws[t + 1] - ws[t - 1]) / (2.0 * motion.dt);
        else if (t == 0)
            wslot = (-3.0 * ws[0] + 4.0 * ws[1] - ws[2]) / (2.0 * motion.dt);
        else
            wslot = (3.0 * ws[n - 1] - 4.0 * ws[n - 2] + ws[n - 3]) / (2.0 * motion.dt);
    }
    for (int p = 0; p < motion.grid.points(); ++p) {
        Vec y = motion.slices[static_cast<std::size_t>(t)].row(p).transpose();
        Tensor R = curvature(chart, y);
        Vec rw = (slot == CurvatureSlot::displacement)
                     ? curvature_action(R, wslot.row(p).transpose(), vel.row(p).transpose(),
                                        vel.row(p).transpose())
                     : curvature_action(R, vel.row(p).transpose(), wslot.row(p).transpose(),
                                        vel.row(p).transpose());
        for (int i = 0; i < m; ++i) out(p, i) += rw[i];
    }
    return out;
}

DisplacementField inertial_linearization(const Motion& motion, const DisplacementField& w,
                                         const SpaceChart& chart, CurvatureSlot slot) {
    if (motion.steps() < 4)
        throw StencilError("inertial_linearization: need at least 5 time slices");
    DisplacementField out;
    out.slices.resize(motion.slices.size());
    for (int t = 0; t <= motion.steps(); ++t)
        out.slices[static_cast<std::size_t>(t)] =
            inertial_linearization_slice(motion, w, chart, t, slot);
    return out;
}

namespace {

std::vector<Tensor> gammas_of_slice(const SpaceChart& chart, const Mat& phi) {
    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(phi.rows()));
    for (int p = 0; p < phi.rows(); ++p)
        out.push_back(christoffel(chart, phi.row(p).transpose()));
    return out;
}

// Linear force part shared by apply_linearized and the Newton assembly:
//   −A1 w − A2 ∂w − A3 ∂²w + Γ-coupling(divS, w).
Mat linear_force_part(const LinearizedCoefficients& coef, const std::vector<Tensor>& gammas,
                      const BodyGrid& grid, int m, const Mat& wslice) {
    const int d = grid.dim();
    std::vector<Mat> dw(d);
    for (int de = 0; de < d; ++de) dw[de] = grid.d1(wslice, de);
    std::vector<std::vector<Mat>> ddw(d, std::vector<Mat>(d));
    for (int al = 0; al < d; ++al)
        for (int be = 0; be < d; ++be)
            ddw[al][be] = (al == be) ? grid.d2(wslice, al) : grid.dmixed(wslice, al, be);

    Mat out = Mat::Zero(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        const Mat& A1 = coef.A1[static_cast<std::size_t>(p)];
        const Tensor& A2 = coef.A2[static_cast<std::size_t>(p)];
        const Tensor& A3 = coef.A3[static_cast<std::size_t>(p)];
        const Tensor& Gam = gammas[static_cast<std::size_t>(p)];
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
                s -= A1(i, j) * wslice(p, i);
                for (int de = 0; de < d; ++de) s -= A2(de, i, j) * dw[de](p, i);
            }
            for (int al = 0; al < d; ++al)
                for (int be = 0; be < d; ++be)
                    for (int l = 0; l < m; ++l) s -= A3(al, be, l, j) * ddw[al][be](p, l);
            for (int k = 0; k < m; ++k)
                for (int i = 0; i < m; ++i)
                    s += Gam(k, i, j) * wslice(p, i) * coef.div_psi(p, k);
            out(p, j) = s;
        }
    }
    return out;
}

// Linear part of the boundary expression from the precomputed coefficient
// arrays, per face: n_α [ ∂ψ^α_j/∂y^k w^k + ∂ψ^α_j/∂A^k_β w^k_{,β}
//                        − ψ^α_i Γ^i_{lj} w^l ].
BoundaryField boundary_linear_part(const LinearizedCoefficients& coef, const BodyGrid& grid,
                                   int m, const Mat& wslice, const LinearizeOptions& opts) {
    const int d = grid.dim();
    std::vector<Mat> dw(d);
    for (int be = 0; be < d; ++be) dw[be] = grid.d1(wslice, be);
    BoundaryField out;
    for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
        const Face& f = grid.faces()[fi];
        Mat vals(static_cast<Eigen::Index>(f.points.size()), m);
        const int al = f.axis;
        const double n = f.conormal();
        for (std::size_t k = 0; k < f.points.size(); ++k) {
            const int p = f.points[k];
            const Mat& psi = coef.boundary_psi[fi][k];
            const Tensor& py = coef.boundary_dpsi_dy[fi][k];
            const Tensor& pA = coef.boundary_dpsi_dA[fi][k];
            const Tensor& Gam = coef.boundary_gamma[fi][k];
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int kk = 0; kk < m; ++kk) {
                    s += py(al, j, kk) * wslice(p, kk);
                    for (int be = 0; be < d; ++be) s += pA(al, j, kk, be) * dw[be](p, kk);
                }
                if (opts.boundary == BoundaryReading::with_frame_transport)
                    for (int i = 0; i < m; ++i)
                        for (int l = 0; l < m; ++l)
                            s -= psi(al, i) * wslice(p, l) * Gam(i, l, j);
                vals(static_cast<Eigen::Index>(k), j) = n * s;
            }
        }
        out.values.push_back(std::move(vals));
    }
    return out;
}

}  // namespace

Mat apply_linearized(const Motion& motion, const DisplacementField& w,
                     const ConstitutiveDensity& cd, const SpaceChart& chart,
                     const BodyGrid& grid, int t, const LinearizeOptions& opts) {
    const int m = motion.space_dim();
    const Mat& phi = motion.slices[static_cast<std::size_t>(t)];
    LinearizedCoefficients coef = coefficient_fields(phi, cd, chart, grid, opts.divergence);

    Mat acc = acceleration_slice(motion, chart, t);
    Mat jac = inertial_linearization_slice(motion, w, chart, t, opts.curvature_slot);
    Mat force_lin = linear_force_part(coef, gammas_of_slice(chart, phi), grid, m,
                                      w.slices[static_cast<std::size_t>(t)]);

    Mat out(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        Mat G = chart.metric(phi.row(p).transpose());
        const double rho = grid.rho(p);
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += G(i, j) * (acc(p, i) + jac(p, i));
            double constant;
            if (opts.coupling == CouplingReading::affine_constant) {
                constant = coef.div_psi(p, j);
            } else {
                constant = 0.0;
                for (int k = 0; k < m; ++k) constant -= coef.div_psi(p, k) * coef.div_psi(p, j);
            }
            out(p, j) = rho * s - constant + force_lin(p, j);
        }
    }
    return out;
}

BoundaryField boundary_linearized(const Motion& motion, const DisplacementField& w,
                                  const ConstitutiveDensity& cd, const SpaceChart& chart,
                                  const BodyGrid& grid, int t, const LinearizeOptions& opts,
                                  const LoadingDensity& load) {
    const int d = grid.dim();
    const int m = motion.space_dim();
    const Mat& phi = motion.slices[static_cast<std::size_t>(t)];
    const Mat& ws = w.slices[static_cast<std::size_t>(t)];
    Jet1Field J = jet_of_slice(grid, phi);
    std::vector<Mat> dw(d);
    for (int be = 0; be < d; ++be) dw[be] = grid.d1(ws, be);

    BoundaryField out;
    for (const Face& f : grid.faces()) {
        Mat vals(static_cast<Eigen::Index>(f.points.size()), m);
        for (std::size_t k = 0; k < f.points.size(); ++k) {
            const int p = f.points[k];
            DensityArg a{&grid, p, J.y.row(p).transpose(), J.first[p]};
            Mat psi = cd.psi(a);
            Tensor py = cd.dpsi_dy(a);
            Tensor pA = cd.dpsi_dA(a);
            Tensor Gam = christoffel(chart, a.y);
            const double n = f.conormal();
            const int al = f.axis;
            for (int j = 0; j < m; ++j) {
                double s = psi(al, j);
                for (int kk = 0; kk < m; ++kk) {
                    s += py(al, j, kk) * ws(p, kk);
                    for (int be = 0; be < d; ++be) s += pA(al, j, kk, be) * dw[be](p, kk);
                }
                if (opts.boundary == BoundaryReading::with_frame_transport)
                    for (int i = 0; i < m; ++i)
                        for (int l = 0; l < m; ++l)
                            s -= psi(al, i) * ws(p, l) * Gam(i, l, j);
                double T = load.has_surface()
                               ? load.surface(grid.coord(p), a.y)[j]
                               : 0.0;
                vals(static_cast<Eigen::Index>(k), j) = n * s - T;
            }
        }
        out.values.push_back(std::move(vals));
    }
    return out;
}

Mat exp_update(const SpaceChart& chart, const Mat& phi, const Mat& w, int steps) {
    Mat out(phi.rows(), phi.cols());
    for (int p = 0; p < phi.rows(); ++p) {
        GeodesicState g = exp_map(chart, {phi.row(p).transpose(), w.row(p).transpose()}, steps);
        out.row(p) = g.position.transpose();
    }
    return out;
}

Mat newton_step(const Mat& phi, const ConstitutiveDensity& cd, const LoadingDensity& load,
                const SpaceChart& chart, const BodyGrid& grid, const NewtonOptions& opts) {
    const int m = static_cast<int>(phi.cols());
    const int P = grid.points();
    const int n_unk = P * m;

    // Fold the body loading so the linear coefficients see its y-dependence.
    std::shared_ptr<const ConstitutiveDensity> folded;
    const ConstitutiveDensity* density = &cd;
    if (load.has_body()) {
        LoadingDensity body_only;
        body_only.body = load.body;
        folded = fold_body_loading(
            std::shared_ptr<const ConstitutiveDensity>(&cd, [](const ConstitutiveDensity*) {}),
            body_only);
        density = folded.get();
    }

    LinearizedCoefficients coef =
        coefficient_fields(phi, *density, chart, grid, opts.lin.divergence);

    LoadingDensity surface_only;
    surface_only.surface = load.surface;

    // Clamp classification per point.
    std::vector<bool> clamped(static_cast<std::size_t>(P), false);
    for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
        const bool clamp =
            opts.clamp_all_boundary ||
            std::find(opts.clamp_faces.begin(), opts.clamp_faces.end(), static_cast<int>(fi)) !=
                opts.clamp_faces.end();
        if (clamp)
            for (int p : grid.faces()[fi].points) clamped[static_cast<std::size_t>(p)] = true;
    }

    std::vector<Tensor> gammas = gammas_of_slice(chart, phi);

    // Row map: interior equations at interior points, traction equations at
    // unclamped boundary points (faces sharing a corner point sum there),
    // identity rows at clamped points.
    auto linear_rows = [&](const Mat& ws) {
        Mat rows = Mat::Zero(P, m);
        Mat interior = linear_force_part(coef, gammas, grid, m, ws);
        BoundaryField blin = boundary_linear_part(coef, grid, m, ws, opts.lin);
        for (int p = 0; p < P; ++p) {
            if (clamped[static_cast<std::size_t>(p)]) {
                rows.row(p) = ws.row(p);
            } else if (!grid.is_boundary(p)) {
                rows.row(p) = interior.row(p);
            }
        }
        for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
            const Face& f = grid.faces()[fi];
            for (std::size_t k = 0; k < f.points.size(); ++k) {
                const int p = f.points[k];
                if (clamped[static_cast<std::size_t>(p)]) continue;
                rows.row(p) += blin.values[fi].row(static_cast<Eigen::Index>(k));
            }
        }
        return rows;
    };

    // Right-hand side: minus the static residuals.
    ResidualField res = equilibrium_residual(phi, *density, surface_only, grid, chart,
                                             opts.lin.divergence);
    Mat rhs = Mat::Zero(P, m);
    for (int p = 0; p < P; ++p) {
        if (clamped[static_cast<std::size_t>(p)]) continue;
        if (!grid.is_boundary(p)) rhs.row(p) = -res.interior.row(p);
    }
    for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
        const Face& f = grid.faces()[fi];
        for (std::size_t k = 0; k < f.points.size(); ++k) {
            const int p = f.points[k];
            if (clamped[static_cast<std::size_t>(p)]) continue;
            rhs.row(p) -= res.boundary.values[fi].row(static_cast<Eigen::Index>(k));
        }
    }

    // Dense assembly by applying the linear map to coordinate directions.
    Mat Asys(n_unk, n_unk);
    Mat basis = Mat::Zero(P, m);
    for (int c = 0; c < n_unk; ++c) {
        basis(c / m, c % m) = 1.0;
        Mat col = linear_rows(basis);
        basis(c / m, c % m) = 0.0;
        for (int p = 0; p < P; ++p)
            for (int j = 0; j < m; ++j) Asys(p * m + j, c) = col(p, j);
    }
    Vec bsys(n_unk);
    for (int p = 0; p < P; ++p)
        for (int j = 0; j < m; ++j) bsys[p * m + j] = rhs(p, j);

    Eigen::FullPivLU<Mat> lu(Asys);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
        const int nullity = n_unk - static_cast<int>(lu.rank());
        throw DegenerateLinearizationError(
            "degenerate linearization: singular system, null-space dimension estimate " +
                std::to_string(nullity),
            nullity);
    }
    Vec u = lu.solve(bsys);
    const double rel = (Asys * u - bsys).norm() / std::max(bsys.norm(), 1e-30);
    if (rel > opts.solver_tol)
        throw Error("newton_step: linear solve above tolerance, relative residual " +
                    std::to_string(rel));

    Mat w(P, m);
    for (int p = 0; p < P; ++p)
        for (int j = 0; j < m; ++j) w(p, j) = u[p * m + j];
    return w;
}

}  // namespace manidyn

#include "manidyn/constitutive.hpp"

#include <cmath>

#include "manidyn/errors.hpp"
#include "manidyn/geometry.hpp"

namespace manidyn {

namespace {

// Central or second-order one-sided difference of fn over grid neighbors
// along one axis, at frozen (y, A). fn maps a DensityArg to any type with
// +,-,* by scalar via the accumulate lambda; we just return the three sample
// weights and offsets instead of being generic.
struct XStencil {
    int offs[3];
    double wgt[3];
    int count;
};

XStencil x_stencil(const BodyGrid& g, int p, int axis) {
    const int i = g.axis_index(p, axis);
    const double h = g.h();
    XStencil s{};
    if (i > 0 && i < g.n() - 1) {
        s = {{g.shift(p, axis, 1), g.shift(p, axis, -1), 0},
             {1.0 / (2.0 * h), -1.0 / (2.0 * h), 0.0},
             2};
    } else if (i == 0) {
        s = {{p, g.shift(p, axis, 1), g.shift(p, axis, 2)},
             {-3.0 / (2.0 * h), 4.0 / (2.0 * h), -1.0 / (2.0 * h)},
             3};
    } else {
        s = {{p, g.shift(p, axis, -1), g.shift(p, axis, -2)},
             {3.0 / (2.0 * h), -4.0 / (2.0 * h), 1.0 / (2.0 * h)},
             3};
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Finite-difference defaults
// ---------------------------------------------------------------------------

Tensor ConstitutiveDensity::dpsi_dx(const DensityArg& a) const {
    Tensor out = Tensor::zeros({d_, m_, d_});
    for (int beta = 0; beta < d_; ++beta) {
        XStencil st = x_stencil(*a.grid, a.point, beta);
        for (int s = 0; s < st.count; ++s) {
            DensityArg n{a.grid, st.offs[s], a.y, a.A};
            Mat ps = psi(n);
            for (int al = 0; al < d_; ++al)
                for (int i = 0; i < m_; ++i) out(al, i, beta) += st.wgt[s] * ps(al, i);
        }
    }
    return out;
}

Tensor ConstitutiveDensity::dpsi_dy(const DensityArg& a) const {
    Tensor out = Tensor::zeros({d_, m_, m_});
    DensityArg n = a;
    for (int k = 0; k < m_; ++k) {
        n.y[k] = a.y[k] + h_c;
        Mat pp = psi(n);
        n.y[k] = a.y[k] - h_c;
        Mat pm = psi(n);
        n.y[k] = a.y[k];
        for (int al = 0; al < d_; ++al)
            for (int i = 0; i < m_; ++i) out(al, i, k) = (pp(al, i) - pm(al, i)) / (2.0 * h_c);
    }
    return out;
}

Tensor ConstitutiveDensity::dpsi_dA(const DensityArg& a) const {
    Tensor out = Tensor::zeros({d_, m_, m_, d_});
    DensityArg n = a;
    for (int k = 0; k < m_; ++k)
        for (int be = 0; be < d_; ++be) {
            n.A(k, be) = a.A(k, be) + h_c;
            Mat pp = psi(n);
            n.A(k, be) = a.A(k, be) - h_c;
            Mat pm = psi(n);
            n.A(k, be) = a.A(k, be);
            for (int al = 0; al < d_; ++al)
                for (int i = 0; i < m_; ++i)
                    out(al, i, k, be) = (pp(al, i) - pm(al, i)) / (2.0 * h_c);
        }
    return out;
}

Mat ConstitutiveDensity::dR_dy(const DensityArg& a) const {
    Mat out(m_, m_);
    DensityArg n = a;
    for (int i = 0; i < m_; ++i) {
        n.y[i] = a.y[i] + h_c;
        Vec rp = R(n);
        n.y[i] = a.y[i] - h_c;
        Vec rm = R(n);
        n.y[i] = a.y[i];
        out.col(i) = (rp - rm) / (2.0 * h_c);
    }
    return out;
}

Tensor ConstitutiveDensity::dR_dA(const DensityArg& a) const {
    Tensor out = Tensor::zeros({m_, m_, d_});
    DensityArg n = a;
    for (int i = 0; i < m_; ++i)
        for (int de = 0; de < d_; ++de) {
            n.A(i, de) = a.A(i, de) + h_c;
            Vec rp = R(n);
            n.A(i, de) = a.A(i, de) - h_c;
            Vec rm = R(n);
            n.A(i, de) = a.A(i, de);
            for (int j = 0; j < m_; ++j) out(j, i, de) = (rp[j] - rm[j]) / (2.0 * h_c);
        }
    return out;
}

Mat ConstitutiveDensity::d2psi_dydx_contracted(const DensityArg& a) const {
    if (!has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Mat out = Mat::Zero(m_, m_);
    for (int al = 0; al < d_; ++al) {
        XStencil st = x_stencil(*a.grid, a.point, al);
        for (int s = 0; s < st.count; ++s) {
            DensityArg n{a.grid, st.offs[s], a.y, a.A};
            Tensor t = dpsi_dy(n);
            for (int j = 0; j < m_; ++j)
                for (int i = 0; i < m_; ++i) out(j, i) += st.wgt[s] * t(al, j, i);
        }
    }
    return out;
}

Tensor ConstitutiveDensity::d2psi_dAdx_contracted(const DensityArg& a) const {
    if (!has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Tensor out = Tensor::zeros({m_, m_, d_});
    for (int al = 0; al < d_; ++al) {
        XStencil st = x_stencil(*a.grid, a.point, al);
        for (int s = 0; s < st.count; ++s) {
            DensityArg n{a.grid, st.offs[s], a.y, a.A};
            Tensor t = dpsi_dA(n);
            for (int j = 0; j < m_; ++j)
                for (int i = 0; i < m_; ++i)
                    for (int de = 0; de < d_; ++de)
                        out(j, i, de) += st.wgt[s] * t(al, j, i, de);
        }
    }
    return out;
}

Tensor ConstitutiveDensity::d2psi_dydy(const DensityArg& a) const {
    if (!has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Tensor out = Tensor::zeros({d_, m_, m_, m_});
    DensityArg n = a;
    for (int l = 0; l < m_; ++l) {
        n.y[l] = a.y[l] + h_c;
        Tensor tp = dpsi_dy(n);
        n.y[l] = a.y[l] - h_c;
        Tensor tm = dpsi_dy(n);
        n.y[l] = a.y[l];
        for (int al = 0; al < d_; ++al)
            for (int j = 0; j < m_; ++j)
                for (int i = 0; i < m_; ++i)
                    out(al, j, i, l) = (tp(al, j, i) - tm(al, j, i)) / (2.0 * h_c);
    }
    return out;
}

Tensor ConstitutiveDensity::d2psi_dydA(const DensityArg& a) const {
    if (!has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Tensor out = Tensor::zeros({d_, m_, m_, m_, d_});
    DensityArg n = a;
    for (int l = 0; l < m_; ++l)
        for (int be = 0; be < d_; ++be) {
            n.A(l, be) = a.A(l, be) + h_c;
            Tensor tp = dpsi_dy(n);
            n.A(l, be) = a.A(l, be) - h_c;
            Tensor tm = dpsi_dy(n);
            n.A(l, be) = a.A(l, be);
            for (int al = 0; al < d_; ++al)
                for (int j = 0; j < m_; ++j)
                    for (int i = 0; i < m_; ++i)
                        out(al, j, i, l, be) = (tp(al, j, i) - tm(al, j, i)) / (2.0 * h_c);
        }
    return out;
}

Tensor ConstitutiveDensity::d2psi_dAdA(const DensityArg& a) const {
    if (!has_second_partials())
        throw NotTwiceDifferentiableError("density not twice differentiable");
    Tensor out = Tensor::zeros({d_, m_, m_, d_, m_, d_});
    DensityArg n = a;
    for (int l = 0; l < m_; ++l)
        for (int be = 0; be < d_; ++be) {
            n.A(l, be) = a.A(l, be) + h_c;
            Tensor tp = dpsi_dA(n);
            n.A(l, be) = a.A(l, be) - h_c;
            Tensor tm = dpsi_dA(n);
            n.A(l, be) = a.A(l, be);
            for (int al = 0; al < d_; ++al)
                for (int j = 0; j < m_; ++j)
                    for (int i = 0; i < m_; ++i)
                        for (int de = 0; de < d_; ++de)
                            out(al, j, i, de, l, be) =
                                (tp(al, j, i, de) - tm(al, j, i, de)) / (2.0 * h_c);
        }
    return out;
}

Vec HyperelasticLagrangian::dL_dy(const DensityArg& a) const {
    Vec out(m_);
    DensityArg n = a;
    for (int k = 0; k < m_; ++k) {
        n.y[k] = a.y[k] + h_c;
        double vp = value(n);
        n.y[k] = a.y[k] - h_c;
        double vm = value(n);
        n.y[k] = a.y[k];
        out[k] = (vp - vm) / (2.0 * h_c);
    }
    return out;
}

Mat HyperelasticLagrangian::dL_dA(const DensityArg& a) const {
    Mat out(m_, d_);
    DensityArg n = a;
    for (int i = 0; i < m_; ++i)
        for (int al = 0; al < d_; ++al) {
            n.A(i, al) = a.A(i, al) + h_c;
            double vp = value(n);
            n.A(i, al) = a.A(i, al) - h_c;
            double vm = value(n);
            n.A(i, al) = a.A(i, al);
            out(i, al) = (vp - vm) / (2.0 * h_c);
        }
    return out;
}

Mat HyperelasticLagrangian::d2L_dydy(const DensityArg& a) const {
    Mat out(m_, m_);
    DensityArg n = a;
    for (int l = 0; l < m_; ++l) {
        n.y[l] = a.y[l] + h_c;
        Vec gp = dL_dy(n);
        n.y[l] = a.y[l] - h_c;
        Vec gm = dL_dy(n);
        n.y[l] = a.y[l];
        out.col(l) = (gp - gm) / (2.0 * h_c);
    }
    return out;
}

Tensor HyperelasticLagrangian::d2L_dAdy(const DensityArg& a) const {
    Tensor out = Tensor::zeros({m_, d_, m_});
    DensityArg n = a;
    for (int k = 0; k < m_; ++k) {
        n.y[k] = a.y[k] + h_c;
        Mat gp = dL_dA(n);
        n.y[k] = a.y[k] - h_c;
        Mat gm = dL_dA(n);
        n.y[k] = a.y[k];
        for (int i = 0; i < m_; ++i)
            for (int al = 0; al < d_; ++al)
                out(i, al, k) = (gp(i, al) - gm(i, al)) / (2.0 * h_c);
    }
    return out;
}

Tensor HyperelasticLagrangian::d2L_dAdA(const DensityArg& a) const {
    Tensor out = Tensor::zeros({m_, d_, m_, d_});
    DensityArg n = a;
    for (int k = 0; k < m_; ++k)
        for (int be = 0; be < d_; ++be) {
            n.A(k, be) = a.A(k, be) + h_c;
            Mat gp = dL_dA(n);
            n.A(k, be) = a.A(k, be) - h_c;
            Mat gm = dL_dA(n);
            n.A(k, be) = a.A(k, be);
            for (int i = 0; i < m_; ++i)
                for (int al = 0; al < d_; ++al)
                    out(i, al, k, be) = (gp(i, al) - gm(i, al)) / (2.0 * h_c);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Hyperelastic construction
// ---------------------------------------------------------------------------

namespace {

class HyperelasticDensity final : public ConstitutiveDensity {
public:
    explicit HyperelasticDensity(std::shared_ptr<const HyperelasticLagrangian> lag)
        : ConstitutiveDensity(lag->body_dim(), lag->space_dim()), lag_(std::move(lag)) {}

    Mat psi(const DensityArg& a) const override {
        const double rho = a.grid->rho(a.point);
        Mat dA = lag_->dL_dA(a);
        Mat out(d_, m_);
        for (int al = 0; al < d_; ++al)
            for (int i = 0; i < m_; ++i) out(al, i) = rho * dA(i, al);
        return out;
    }
    Vec R(const DensityArg& a) const override { return a.grid->rho(a.point) * lag_->dL_dy(a); }

    Tensor dpsi_dy(const DensityArg& a) const override {
        const double rho = a.grid->rho(a.point);
        Tensor t = lag_->d2L_dAdy(a);
        Tensor out = Tensor::zeros({d_, m_, m_});
        for (int al = 0; al < d_; ++al)
            for (int i = 0; i < m_; ++i)
                for (int k = 0; k < m_; ++k) out(al, i, k) = rho * t(i, al, k);
        return out;
    }
    Tensor dpsi_dA(const DensityArg& a) const override {
        const double rho = a.grid->rho(a.point);
        Tensor t = lag_->d2L_dAdA(a);
        Tensor out = Tensor::zeros({d_, m_, m_, d_});
        for (int al = 0; al < d_; ++al)
            for (int i = 0; i < m_; ++i)
                for (int k = 0; k < m_; ++k)
                    for (int be = 0; be < d_; ++be) out(al, i, k, be) = rho * t(i, al, k, be);
        return out;
    }
    Mat dR_dy(const DensityArg& a) const override {
        return a.grid->rho(a.point) * lag_->d2L_dydy(a);
    }
    Tensor dR_dA(const DensityArg& a) const override {
        const double rho = a.grid->rho(a.point);
        Tensor t = lag_->d2L_dAdy(a);  // (i, δ, j) = ∂²ℒ/∂A^i_δ ∂y^j
        Tensor out = Tensor::zeros({m_, m_, d_});
        for (int j = 0; j < m_; ++j)
            for (int i = 0; i < m_; ++i)
                for (int de = 0; de < d_; ++de) out(j, i, de) = rho * t(i, de, j);
        return out;
    }

private:
    std::shared_ptr<const HyperelasticLagrangian> lag_;
};

}  // namespace

std::shared_ptr<ConstitutiveDensity> from_lagrangian(
    std::shared_ptr<const HyperelasticLagrangian> lag) {
    return std::make_shared<HyperelasticDensity>(std::move(lag));
}

// ---------------------------------------------------------------------------
// Loading fold
// ---------------------------------------------------------------------------

namespace {

class FoldedDensity final : public ConstitutiveDensity {
public:
    FoldedDensity(std::shared_ptr<const ConstitutiveDensity> inner, LoadingDensity load)
        : ConstitutiveDensity(inner->body_dim(), inner->space_dim()),
          inner_(std::move(inner)),
          load_(std::move(load)) {}

    Mat psi(const DensityArg& a) const override { return inner_->psi(a); }
    Vec R(const DensityArg& a) const override {
        return inner_->R(a) - a.grid->rho(a.point) * load_.body_at(a.x(), a.y, m_);
    }
    Tensor dpsi_dx(const DensityArg& a) const override { return inner_->dpsi_dx(a); }
    Tensor dpsi_dy(const DensityArg& a) const override { return inner_->dpsi_dy(a); }
    Tensor dpsi_dA(const DensityArg& a) const override { return inner_->dpsi_dA(a); }
    Mat dR_dy(const DensityArg& a) const override {
        Mat out = inner_->dR_dy(a);
        if (load_.has_body()) {
            const double rho = a.grid->rho(a.point);
            Vec y = a.y;
            for (int k = 0; k < m_; ++k) {
                y[k] = a.y[k] + h_c;
                Vec bp = load_.body(a.x(), y);
                y[k] = a.y[k] - h_c;
                Vec bm = load_.body(a.x(), y);
                y[k] = a.y[k];
                out.col(k) -= rho * (bp - bm) / (2.0 * h_c);
            }
        }
        return out;
    }
    Tensor dR_dA(const DensityArg& a) const override { return inner_->dR_dA(a); }
    bool has_second_partials() const override { return inner_->has_second_partials(); }
    Tensor d2psi_dydy(const DensityArg& a) const override { return inner_->d2psi_dydy(a); }
    Tensor d2psi_dydA(const DensityArg& a) const override { return inner_->d2psi_dydA(a); }
    Tensor d2psi_dAdA(const DensityArg& a) const override { return inner_->d2psi_dAdA(a); }
    Mat d2psi_dydx_contracted(const DensityArg& a) const override {
        return inner_->d2psi_dydx_contracted(a);
    }
    Tensor d2psi_dAdx_contracted(const DensityArg& a) const override {
        return inner_->d2psi_dAdx_contracted(a);
    }

private:
    std::shared_ptr<const ConstitutiveDensity> inner_;
    LoadingDensity load_;
};

}  // namespace

std::shared_ptr<ConstitutiveDensity> fold_body_loading(
    std::shared_ptr<const ConstitutiveDensity> cd, LoadingDensity load) {
    return std::make_shared<FoldedDensity>(std::move(cd), std::move(load));
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

namespace {

class ZeroLagrangian final : public HyperelasticLagrangian {
public:
    using HyperelasticLagrangian::HyperelasticLagrangian;
    double value(const DensityArg&) const override { return 0.0; }
    Vec dL_dy(const DensityArg&) const override { return Vec::Zero(m_); }
    Mat dL_dA(const DensityArg&) const override { return Mat::Zero(m_, d_); }
    Mat d2L_dydy(const DensityArg&) const override { return Mat::Zero(m_, m_); }
    Tensor d2L_dAdy(const DensityArg&) const override { return Tensor::zeros({m_, d_, m_}); }
    Tensor d2L_dAdA(const DensityArg&) const override {
        return Tensor::zeros({m_, d_, m_, d_});
    }
};

class DirichletLagrangian final : public HyperelasticLagrangian {
public:
    DirichletLagrangian(int d, std::shared_ptr<const SpaceChart> chart)
        : HyperelasticLagrangian(d, chart->dim), chart_(std::move(chart)) {}

    double value(const DensityArg& a) const override {
        Mat G = chart_->metric(a.y);
        double s = 0.0;
        for (int al = 0; al < d_; ++al) s += (a.A.col(al).transpose() * G * a.A.col(al))(0, 0);
        return 0.5 * s;
    }
    Vec dL_dy(const DensityArg& a) const override {
        Tensor dG = chart_->metric_d1(a.y);
        Vec out = Vec::Zero(m_);
        for (int k = 0; k < m_; ++k) {
            double s = 0.0;
            for (int i = 0; i < m_; ++i)
                for (int j = 0; j < m_; ++j)
                    for (int al = 0; al < d_; ++al)
                        s += dG(k, i, j) * a.A(i, al) * a.A(j, al);
            out[k] = 0.5 * s;
        }
        return out;
    }
    Mat dL_dA(const DensityArg& a) const override { return chart_->metric(a.y) * a.A; }
    Mat d2L_dydy(const DensityArg& a) const override {
        Tensor d2G = chart_->metric_d2(a.y);
        Mat out = Mat::Zero(m_, m_);
        for (int k = 0; k < m_; ++k)
            for (int l = 0; l < m_; ++l) {
                double s = 0.0;
                for (int i = 0; i < m_; ++i)
                    for (int j = 0; j < m_; ++j)
                        for (int al = 0; al < d_; ++al)
                            s += d2G(k, l, i, j) * a.A(i, al) * a.A(j, al);
                out(k, l) = 0.5 * s;
            }
        return out;
    }
    Tensor d2L_dAdy(const DensityArg& a) const override {
        Tensor dG = chart_->metric_d1(a.y);
        Tensor out = Tensor::zeros({m_, d_, m_});
        for (int i = 0; i < m_; ++i)
            for (int al = 0; al < d_; ++al)
                for (int k = 0; k < m_; ++k) {
                    double s = 0.0;
                    for (int j = 0; j < m_; ++j) s += dG(k, i, j) * a.A(j, al);
                    out(i, al, k) = s;
                }
        return out;
    }
    Tensor d2L_dAdA(const DensityArg& a) const override {
        Mat G = chart_->metric(a.y);
        Tensor out = Tensor::zeros({m_, d_, m_, d_});
        for (int i = 0; i < m_; ++i)
            for (int al = 0; al < d_; ++al)
                for (int k = 0; k < m_; ++k) out(i, al, k, al) = G(i, k);
        return out;
    }

private:
    std::shared_ptr<const SpaceChart> chart_;
};

class SvkLagrangian final : public HyperelasticLagrangian {
public:
    SvkLagrangian(int d, std::shared_ptr<const SpaceChart> chart,
                  std::shared_ptr<const ReferenceMetric> g, double lambda, double mu)
        : HyperelasticLagrangian(d, chart->dim),
          chart_(std::move(chart)),
          g_(std::move(g)),
          lambda_(lambda),
          mu_(mu) {}

    double value(const DensityArg& a) const override {
        Work w = prepare(a);
        const double tr = (w.ginv * w.E).trace();
        const double sq = (w.ginv * w.E * w.ginv * w.E).trace();
        return 0.5 * lambda_ * tr * tr + mu_ * sq;
    }
    Vec dL_dy(const DensityArg& a) const override {
        Work w = prepare(a);
        Tensor dG = chart_->metric_d1(a.y);
        Vec out = Vec::Zero(m_);
        for (int k = 0; k < m_; ++k) {
            double s = 0.0;
            for (int mu = 0; mu < d_; ++mu)
                for (int nu = 0; nu < d_; ++nu) {
                    double dE = 0.0;
                    for (int i = 0; i < m_; ++i)
                        for (int j = 0; j < m_; ++j)
                            dE += dG(k, i, j) * a.A(i, mu) * a.A(j, nu);
                    s += w.Sigma(mu, nu) * 0.5 * dE;
                }
            out[k] = s;
        }
        return out;
    }
    Mat dL_dA(const DensityArg& a) const override {
        Work w = prepare(a);
        // ∂ℒ/∂A^i_γ = Σ^{γν} G_{ij} A^j_ν
        return w.G * a.A * w.Sigma;  // (m×m)(m×d)(d×d) → (i,γ)
    }
    Tensor d2L_dAdA(const DensityArg& a) const override {
        Work w = prepare(a);
        Mat B = w.G * a.A;  // B(i,ν) = G_{ij} A^j_ν
        Tensor out = Tensor::zeros({m_, d_, m_, d_});
        for (int i = 0; i < m_; ++i)
            for (int ga = 0; ga < d_; ++ga)
                for (int k = 0; k < m_; ++k)
                    for (int de = 0; de < d_; ++de) {
                        double s = w.Sigma(ga, de) * w.G(i, k);
                        for (int nu = 0; nu < d_; ++nu)
                            for (int la = 0; la < d_; ++la)
                                s += Dmod(w, ga, nu, de, la) * B(k, la) * B(i, nu);
                        out(i, ga, k, de) = s;
                    }
        return out;
    }
    Tensor d2L_dAdy(const DensityArg& a) const override {
        Work w = prepare(a);
        Tensor dG = chart_->metric_d1(a.y);
        Mat B = w.G * a.A;
        Tensor out = Tensor::zeros({m_, d_, m_});
        for (int k = 0; k < m_; ++k) {
            // ∂E/∂y^k and ∂Σ/∂y^k
            Mat dE = Mat::Zero(d_, d_);
            for (int mu = 0; mu < d_; ++mu)
                for (int nu = 0; nu < d_; ++nu) {
                    double s = 0.0;
                    for (int i = 0; i < m_; ++i)
                        for (int j = 0; j < m_; ++j) s += dG(k, i, j) * a.A(i, mu) * a.A(j, nu);
                    dE(mu, nu) = 0.5 * s;
                }
            Mat dSigma = Mat::Zero(d_, d_);
            for (int ga = 0; ga < d_; ++ga)
                for (int nu = 0; nu < d_; ++nu) {
                    double s = 0.0;
                    for (int mu = 0; mu < d_; ++mu)
                        for (int la = 0; la < d_; ++la)
                            s += Dmod(w, ga, nu, mu, la) * dE(mu, la);
                    dSigma(ga, nu) = s;
                }
            for (int i = 0; i < m_; ++i)
                for (int ga = 0; ga < d_; ++ga) {
                    double s = 0.0;
                    for (int nu = 0; nu < d_; ++nu) {
                        s += dSigma(ga, nu) * B(i, nu);
                        double dB = 0.0;
                        for (int j = 0; j < m_; ++j) dB += dG(k, i, j) * a.A(j, nu);
                        s += w.Sigma(ga, nu) * dB;
                    }
                    out(i, ga, k) = s;
                }
        }
        return out;
    }
    Mat d2L_dydy(const DensityArg& a) const override {
        Work w = prepare(a);
        Tensor dG = chart_->metric_d1(a.y);
        Tensor d2G = chart_->metric_d2(a.y);
        auto dE_of = [&](int k) {
            Mat dE = Mat::Zero(d_, d_);
            for (int mu = 0; mu < d_; ++mu)
                for (int nu = 0; nu < d_; ++nu) {
                    double s = 0.0;
                    for (int i = 0; i < m_; ++i)
                        for (int j = 0; j < m_; ++j) s += dG(k, i, j) * a.A(i, mu) * a.A(j, nu);
                    dE(mu, nu) = 0.5 * s;
                }
            return dE;
        };
        Mat out = Mat::Zero(m_, m_);
        for (int k = 0; k < m_; ++k) {
            Mat dEk = dE_of(k);
            for (int l = 0; l < m_; ++l) {
                Mat dEl = dE_of(l);
                double s = 0.0;
                for (int mu = 0; mu < d_; ++mu)
                    for (int nu = 0; nu < d_; ++nu) {
                        double dSig = 0.0;
                        for (int p = 0; p < d_; ++p)
                            for (int q = 0; q < d_; ++q)
                                dSig += Dmod(w, mu, nu, p, q) * dEl(p, q);
                        s += dSig * dEk(mu, nu);
                        double d2E = 0.0;
                        for (int i = 0; i < m_; ++i)
                            for (int j = 0; j < m_; ++j)
                                d2E += d2G(k, l, i, j) * a.A(i, mu) * a.A(j, nu);
                        s += w.Sigma(mu, nu) * 0.5 * d2E;
                    }
                out(k, l) = s;
            }
        }
        return out;
    }

private:
    struct Work {
        Mat G, ginv, E, Sigma;
    };
    Work prepare(const DensityArg& a) const {
        Work w;
        w.G = chart_->metric(a.y);
        const Mat& g = g_->values[static_cast<std::size_t>(a.point)];
        Eigen::FullPivLU<Mat> lu(g);
        if (!lu.isInvertible())
            throw DomainError("singular reference metric at grid point " +
                              std::to_string(a.point));
        w.ginv = lu.inverse();
        Mat C = a.A.transpose() * w.G * a.A;
        w.E = 0.5 * (C - g);
        w.Sigma = lambda_ * (w.ginv * w.E).trace() * w.ginv +
                  2.0 * mu_ * (w.ginv * w.E * w.ginv);
        return w;
    }
    // ∂Σ^{γν}/∂E_{μλ}, symmetrized in (μ,λ).
    double Dmod(const Work& w, int ga, int nu, int mu, int la) const {
        return lambda_ * w.ginv(ga, nu) * w.ginv(mu, la) +
               mu_ * (w.ginv(ga, mu) * w.ginv(nu, la) + w.ginv(ga, la) * w.ginv(nu, mu));
    }

    std::shared_ptr<const SpaceChart> chart_;
    std::shared_ptr<const ReferenceMetric> g_;
    double lambda_;
    double mu_;
};

}  // namespace

std::shared_ptr<const HyperelasticLagrangian> make_zero_lagrangian(int d, int m) {
    return std::make_shared<ZeroLagrangian>(d, m);
}

std::shared_ptr<const HyperelasticLagrangian> make_dirichlet_lagrangian(
    int d, std::shared_ptr<const SpaceChart> chart) {
    return std::make_shared<DirichletLagrangian>(d, std::move(chart));
}

ReferenceMetric ReferenceMetric::identity(const BodyGrid& grid) {
    ReferenceMetric g;
    g.values.assign(static_cast<std::size_t>(grid.points()),
                    Mat::Identity(grid.dim(), grid.dim()));
    return g;
}

ReferenceMetric ReferenceMetric::from_function(const BodyGrid& grid,
                                               const std::function<Mat(const Vec&)>& g) {
    ReferenceMetric out;
    out.values.reserve(static_cast<std::size_t>(grid.points()));
    for (int p = 0; p < grid.points(); ++p) out.values.push_back(g(grid.coord(p)));
    return out;
}

std::shared_ptr<const HyperelasticLagrangian> make_svk_lagrangian(
    int d, std::shared_ptr<const SpaceChart> chart, std::shared_ptr<const ReferenceMetric> g,
    double lambda, double mu) {
    return std::make_shared<SvkLagrangian>(d, std::move(chart), std::move(g), lambda, mu);
}

// ---------------------------------------------------------------------------
// Stress evaluation
// ---------------------------------------------------------------------------

StressField eval_stress(const ConstitutiveDensity& cd, const BodyGrid& grid,
                        const Jet1Field& jet) {
    const int m = cd.space_dim();
    StressField out;
    out.S.resize(static_cast<std::size_t>(grid.points()));
    out.R.resize(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        DensityArg a{&grid, p, jet.y.row(p).transpose(), jet.first[p]};
        Mat S = cd.psi(a);
        Vec R = cd.R(a);
        if (!all_finite(S) || !all_finite(R))
            throw DomainError("constitutive density domain violation at grid point " +
                              std::to_string(p));
        out.S[static_cast<std::size_t>(p)] = std::move(S);
        out.R.row(p) = R.transpose();
    }
    return out;
}

Mat stress_divergence(const ConstitutiveDensity& cd, const BodyGrid& grid,
                      const Jet1Field& jet, DivergencePath path) {
    const int d = cd.body_dim();
    const int m = cd.space_dim();
    if (path == DivergencePath::composed) {
        StressField f = eval_stress(cd, grid, jet);
        Mat div = -f.R;
        for (int al = 0; al < d; ++al) {
            Mat Sal(grid.points(), m);
            for (int p = 0; p < grid.points(); ++p)
                Sal.row(p) = f.S[static_cast<std::size_t>(p)].row(al);
            div += grid.d1(Sal, al);
        }
        return div;
    }
    Mat div(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) {
        DensityArg a{&grid, p, jet.y.row(p).transpose(), jet.first[p]};
        Tensor dx = cd.dpsi_dx(a);
        Tensor dy = cd.dpsi_dy(a);
        Tensor dA = cd.dpsi_dA(a);
        Vec R = cd.R(a);
        const Tensor& kxx = jet.second[static_cast<std::size_t>(p)];
        for (int j = 0; j < m; ++j) {
            double s = -R[j];
            for (int al = 0; al < d; ++al) {
                s += dx(al, j, al);
                for (int l = 0; l < m; ++l) {
                    s += dy(al, j, l) * jet.first[p](l, al);
                    for (int be = 0; be < d; ++be)
                        s += dA(al, j, l, be) * kxx(l, al, be);
                }
            }
            div(p, j) = s;
        }
    }
    return div;
}

TractionField traction(const ConstitutiveDensity& cd, const BodyGrid& grid,
                       const Jet1Field& jet) {
    const int m = cd.space_dim();
    TractionField out;
    for (const Face& f : grid.faces()) {
        std::vector<Mat> S;
        Mat con(static_cast<Eigen::Index>(f.points.size()), m);
        for (std::size_t k = 0; k < f.points.size(); ++k) {
            const int p = f.points[k];
            DensityArg a{&grid, p, jet.y.row(p).transpose(), jet.first[p]};
            Mat Sp = cd.psi(a);
            con.row(static_cast<Eigen::Index>(k)) = f.conormal() * Sp.row(f.axis);
            S.push_back(std::move(Sp));
        }
        out.S.push_back(std::move(S));
        out.contracted.values.push_back(std::move(con));
    }
    return out;
}

double representation_defect(const ConstitutiveDensity& cd, const BodyGrid& grid,
                             const Jet1Field& jet, const Mat& w) {
    const int d = cd.body_dim();
    const int m = cd.space_dim();
    StressField f = eval_stress(cd, grid, jet);
    std::vector<Mat> dw(d);
    for (int al = 0; al < d; ++al) dw[al] = grid.d1(w, al);

    Vec pairing(grid.points());
    for (int p = 0; p < grid.points(); ++p) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            s += f.R(p, i) * w(p, i);
            for (int al = 0; al < d; ++al)
                s += f.S[static_cast<std::size_t>(p)](al, i) * dw[al](p, i);
        }
        pairing[p] = s;
    }

    Mat div = stress_divergence(cd, grid, jet, DivergencePath::composed);
    Vec divdot(grid.points());
    for (int p = 0; p < grid.points(); ++p) divdot[p] = div.row(p).dot(w.row(p));

    TractionField tr = traction(cd, grid, jet);
    std::vector<Vec> bvals;
    for (std::size_t fi = 0; fi < grid.faces().size(); ++fi) {
        const Face& face = grid.faces()[fi];
        Vec v(static_cast<Eigen::Index>(face.points.size()));
        for (std::size_t k = 0; k < face.points.size(); ++k)
            v[static_cast<Eigen::Index>(k)] =
                tr.contracted.values[fi].row(static_cast<Eigen::Index>(k)).dot(
                    w.row(face.points[k]));
        bvals.push_back(std::move(v));
    }

    return std::abs(grid.integrate(pairing) + grid.integrate(divdot) -
                    grid.integrate_boundary(bvals));
}

}  // namespace manidyn

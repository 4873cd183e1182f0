#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "manidyn/chart.hpp"
#include "manidyn/grid.hpp"
#include "manidyn/kinematics.hpp"

namespace manidyn {

/// Evaluation point of a constitutive density: a grid location (for the
/// explicit x-dependence) together with jet data y, A(i,α) = ∂κ^i/∂x^α.
struct DensityArg {
    const BodyGrid* grid = nullptr;
    int point = 0;
    Vec y;
    Mat A;  // m×d

    Vec x() const { return grid->coord(point); }
};

/// Pointwise constitutive density with components psi(α,i) = ψ^α_i (stress
/// slot, pairing with w^i_{,α}) and R(j) (configurational slot, pairing with
/// w^j). Partials default to central differences: step h_c for the (y,A)
/// slots, grid-neighbor differencing for the explicit x slot. Derived classes
/// override whatever they can supply in closed form.
///
/// Index conventions of the partial tensors:
///   dpsi_dx  (α,i,β)       = ∂ψ^α_i/∂x^β
///   dpsi_dy  (α,i,k)       = ∂ψ^α_i/∂y^k
///   dpsi_dA  (α,i,k,β)     = ∂ψ^α_i/∂A^k_β
///   dR_dy    (j,i)         = ∂R_j/∂y^i
///   dR_dA    (j,i,δ)       = ∂R_j/∂A^i_δ
///   d2psi_dydx_c (j,i)     = Σ_α ∂²ψ^α_j/∂y^i∂x^α
///   d2psi_dAdx_c (j,i,δ)   = Σ_α ∂²ψ^α_j/∂A^i_δ∂x^α
///   d2psi_dydy (α,j,i,l)   = ∂²ψ^α_j/∂y^i∂y^l
///   d2psi_dydA (α,j,i,l,β) = ∂²ψ^α_j/∂y^i∂A^l_β
///   d2psi_dAdA (α,j,i,δ,l,β) = ∂²ψ^α_j/∂A^i_δ∂A^l_β
class ConstitutiveDensity {
public:
    ConstitutiveDensity(int d, int m) : d_(d), m_(m) {}
    virtual ~ConstitutiveDensity() = default;

    int body_dim() const { return d_; }
    int space_dim() const { return m_; }

    double h_c = 1e-5;

    virtual Mat psi(const DensityArg& a) const = 0;
    virtual Vec R(const DensityArg& a) const = 0;

    virtual Tensor dpsi_dx(const DensityArg& a) const;
    virtual Tensor dpsi_dy(const DensityArg& a) const;
    virtual Tensor dpsi_dA(const DensityArg& a) const;
    virtual Mat dR_dy(const DensityArg& a) const;
    virtual Tensor dR_dA(const DensityArg& a) const;

    /// Whether the second partials below may be requested.
    virtual bool has_second_partials() const { return true; }

    virtual Mat d2psi_dydx_contracted(const DensityArg& a) const;
    virtual Tensor d2psi_dAdx_contracted(const DensityArg& a) const;
    virtual Tensor d2psi_dydy(const DensityArg& a) const;
    virtual Tensor d2psi_dydA(const DensityArg& a) const;
    virtual Tensor d2psi_dAdA(const DensityArg& a) const;

protected:
    int d_;
    int m_;
};

/// Lagrangian density ℒ(x,y,A). First and second partials default to central
/// differences of `value`; catalog entries override with closed forms.
class HyperelasticLagrangian {
public:
    HyperelasticLagrangian(int d, int m) : d_(d), m_(m) {}
    virtual ~HyperelasticLagrangian() = default;

    int body_dim() const { return d_; }
    int space_dim() const { return m_; }

    double h_c = 1e-5;

    virtual double value(const DensityArg& a) const = 0;
    virtual Vec dL_dy(const DensityArg& a) const;
    virtual Mat dL_dA(const DensityArg& a) const;              // (i,α)
    virtual Mat d2L_dydy(const DensityArg& a) const;           // (k,l)
    virtual Tensor d2L_dAdy(const DensityArg& a) const;        // (i,α,k)
    virtual Tensor d2L_dAdA(const DensityArg& a) const;        // (i,α,k,β)

protected:
    int d_;
    int m_;
};

/// Hyperelastic construction: ψ^α_i = ρ ∂ℒ/∂A^i_α and R_i = ρ ∂ℒ/∂y^i,
/// with the density partials given by the corresponding second partials of ℒ
/// times ρ. The explicit x slot (through ρ and any reference fields in ℒ) is
/// handled by grid differencing.
std::shared_ptr<ConstitutiveDensity> from_lagrangian(
    std::shared_ptr<const HyperelasticLagrangian> lag);

/// Body and surface loading densities b_i(x,y), 𝒯_i(x,y) (per unit
/// mass-form volume and boundary area respectively). Null means zero.
struct LoadingDensity {
    std::function<Vec(const Vec& x, const Vec& y)> body;
    std::function<Vec(const Vec& x, const Vec& y)> surface;

    static LoadingDensity zero() { return {}; }
    bool has_body() const { return static_cast<bool>(body); }
    bool has_surface() const { return static_cast<bool>(surface); }
    Vec body_at(const Vec& x, const Vec& y, int m) const {
        return body ? body(x, y) : Vec::Zero(m);
    }
    Vec surface_at(const Vec& x, const Vec& y, int m) const {
        return surface ? surface(x, y) : Vec::Zero(m);
    }
};

/// Folds a body loading into the configurational slot: R̃ = R − ρ b(x,y).
/// The interior residual of the folded density with zero loading equals the
/// residual of the original pair.
std::shared_ptr<ConstitutiveDensity> fold_body_loading(
    std::shared_ptr<const ConstitutiveDensity> cd, LoadingDensity load);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

std::shared_ptr<const HyperelasticLagrangian> make_zero_lagrangian(int d, int m);

/// ℒ = ½ G_{ij}(y) A^i_α A^j_β δ^{αβ} (the harmonic-map energy density).
std::shared_ptr<const HyperelasticLagrangian> make_dirichlet_lagrangian(
    int d, std::shared_ptr<const SpaceChart> chart);

/// Reference metric on the body, sampled per grid point (d×d SPD).
struct ReferenceMetric {
    std::vector<Mat> values;
    static ReferenceMetric identity(const BodyGrid& grid);
    static ReferenceMetric from_function(const BodyGrid& grid,
                                         const std::function<Mat(const Vec&)>& g);
};

/// Saint Venant–Kirchhoff energy against a (possibly non-Euclidean) reference
/// metric g(x) on the body:
///   E = ½ (C − g),  C_{αβ} = G_{ij}(y) A^i_α A^j_β,
///   ℒ = λ/2 (tr_g E)² + μ ⟨E,E⟩_g,
/// with traces and norms taken with g⁻¹. When g is not flat there is no
/// stress-free configuration: residual stress at every embedding.
std::shared_ptr<const HyperelasticLagrangian> make_svk_lagrangian(
    int d, std::shared_ptr<const SpaceChart> chart, std::shared_ptr<const ReferenceMetric> g,
    double lambda, double mu);

// ---------------------------------------------------------------------------
// Stress evaluation
// ---------------------------------------------------------------------------

/// Composed stress fields S^α_i(x) = ψ^α_i(j¹κ(x)), R_j(x) = R_j(j¹κ(x)).
struct StressField {
    std::vector<Mat> S;  // per point, d×m
    Mat R;               // points × m
};

StressField eval_stress(const ConstitutiveDensity& cd, const BodyGrid& grid,
                        const Jet1Field& jet);

/// Divergence (divS)_j = S^α_{j,α} − R_j of the composed stress.
/// `composed` differences the composed field on the grid (the oracle path);
/// `chain_rule` expands the total x-derivative through the density partials
/// and the second derivatives of the configuration.
enum class DivergencePath { composed, chain_rule };

Mat stress_divergence(const ConstitutiveDensity& cd, const BodyGrid& grid,
                      const Jet1Field& jet, DivergencePath path = DivergencePath::composed);

/// Per-face values; values[fi] rows follow faces()[fi].points.
struct BoundaryField {
    std::vector<Mat> values;
};

/// Stress restricted to the boundary: per face the full S^α_i together with
/// the contraction against the outward co-normal of the box.
struct TractionField {
    std::vector<std::vector<Mat>> S;  // [face][k] : d×m
    BoundaryField contracted;         // Σ_α S^α_i n_α
};

TractionField traction(const ConstitutiveDensity& cd, const BodyGrid& grid,
                       const Jet1Field& jet);

/// Defect of the discrete integration-by-parts identity
///   ∫ S(j¹w) + ∫ divS·w − ∮ p_σS·w  →  0 as the grid refines,
/// for a test displacement field w over one slice (rows = points).
double representation_defect(const ConstitutiveDensity& cd, const BodyGrid& grid,
                             const Jet1Field& jet, const Mat& w);

}  // namespace manidyn

#pragma once

#include "manidyn/dynamics.hpp"

namespace manidyn {

/// Slot of the displacement in the curvature term of the linearized inertia.
/// `displacement` contracts R(w,V,V); `velocity_of_displacement` contracts
/// R with ∂_t w instead of w. The second variant is kept only so the
/// finite-difference oracle can falsify it on curved targets.
enum class CurvatureSlot { displacement, velocity_of_displacement };

/// Reading of the divergence coupling in the linearized interior equation.
/// `affine_constant` treats the trailing divergence term as the constant
/// completing the nonlinear force; `quadratic_product` multiplies it by the
/// contracted divergence instead (kept behind this flag for falsification).
enum class CouplingReading { affine_constant, quadratic_product };

/// Boundary linearization with or without the connection coupling that
/// accounts for comparing co-vector frames along the perturbation.
enum class BoundaryReading { with_frame_transport, naive };

struct LinearizeOptions {
    CurvatureSlot curvature_slot = CurvatureSlot::displacement;
    CouplingReading coupling = CouplingReading::affine_constant;
    BoundaryReading boundary = BoundaryReading::with_frame_transport;
    DivergencePath divergence = DivergencePath::composed;
};

/// Coefficient fields of the linearized force at a configuration slice.
/// Interior, per grid point p:
///   A1[p](i,j)        multiplies w^i
///   A2[p](δ,i,j)      multiplies w^i_{,δ}
///   A3[p](α,β,l,j)    multiplies w^l_{,αβ}  (equals ∂ψ^α_j/∂A^l_β pointwise)
///   div_psi(p,j)      the stress divergence entering the connection coupling
/// Boundary, per face/point: the stress, its (y,A) partials and the
/// connection coefficients needed by the boundary linearization.
struct LinearizedCoefficients {
    std::vector<Mat> A1;
    std::vector<Tensor> A2;
    std::vector<Tensor> A3;
    Mat div_psi;
    std::vector<std::vector<Mat>> boundary_psi;        // [face][k] d×m
    std::vector<std::vector<Tensor>> boundary_dpsi_dy; // [face][k] (d,m,m)
    std::vector<std::vector<Tensor>> boundary_dpsi_dA; // [face][k] (d,m,m,d)
    std::vector<std::vector<Tensor>> boundary_gamma;   // [face][k] (m,m,m)
};

/// Assembles A1/A2/A3 and the divergence field at a stationary slice:
///   A1_{ij} = Σ_α ∂²ψ^α_j/∂y^i∂x^α + ∂²ψ^α_j/∂y^i∂y^l φ^l_{,α}
///           + ∂²ψ^α_j/∂y^i∂A^l_β φ^l_{,αβ} − ∂R_j/∂y^i,
///   A2^δ_{ij} = Σ_α ∂²ψ^α_j/∂A^i_δ∂x^α + ∂²ψ^α_j/∂A^i_δ∂y^l φ^l_{,α}
///           + ∂ψ^δ_j/∂y^i + ∂²ψ^α_j/∂A^i_δ∂A^l_β φ^l_{,αβ} − ∂R_j/∂A^i_δ,
///   A3^{αβ}_{lj} = ∂ψ^α_j/∂A^l_β.
/// Throws NotTwiceDifferentiableError when the density cannot provide
/// second partials.
LinearizedCoefficients coefficient_fields(const Mat& phi, const ConstitutiveDensity& cd,
                                          const SpaceChart& chart, const BodyGrid& grid,
                                          DivergencePath divergence = DivergencePath::composed);

/// Jacobi operator of the inertia: D²w/dt² + R(w, V, V) at every slice.
DisplacementField inertial_linearization(const Motion& motion, const DisplacementField& w,
                                         const SpaceChart& chart,
                                         CurvatureSlot slot = CurvatureSlot::displacement);
Mat inertial_linearization_slice(const Motion& motion, const DisplacementField& w,
                                 const SpaceChart& chart, int t,
                                 CurvatureSlot slot = CurvatureSlot::displacement);

/// Affine-in-w linearized interior residual at time t:
///   apply(w)_j = ρ G_{ij} (A^i + (D²w/dt²)^i + R^i(w,V,V))
///              − (divS)_j − A1_{ij} w^i − A2^δ_{ij} w^i_{,δ} − A3^{αβ}_{lj} w^l_{,αβ}
///              + Γ^k_{ij} w^i (divS)_k.
/// apply(0) is the nonlinear interior residual (zero/folded loading).
Mat apply_linearized(const Motion& motion, const DisplacementField& w,
                     const ConstitutiveDensity& cd, const SpaceChart& chart,
                     const BodyGrid& grid, int t, const LinearizeOptions& opts = {});

/// Affine-in-w linearized traction at time t, contracted with the outward
/// co-normal:
///   b(w)_j = Σ_α n_α [ ψ^α_j − ψ^α_i w^l Γ^i_{lj}
///                    + ∂ψ^α_j/∂y^k w^k + ∂ψ^α_j/∂A^k_β w^k_{,β} ] − 𝒯_j.
/// Its w = 0 part is the boundary residual.
BoundaryField boundary_linearized(const Motion& motion, const DisplacementField& w,
                                  const ConstitutiveDensity& cd, const SpaceChart& chart,
                                  const BodyGrid& grid, int t,
                                  const LinearizeOptions& opts = {},
                                  const LoadingDensity& load = {});

struct NewtonOptions {
    std::vector<int> clamp_faces;       // Dirichlet w = 0 on these face indices
    bool clamp_all_boundary = false;
    double solver_tol = 1e-10;
    LinearizeOptions lin{};
};

/// One Newton step for the static problem at a stationary configuration:
/// solves the linear part of the static linearization against minus the
/// static residual (interior rows) and the linearized traction against minus
/// the boundary residual (face rows; clamped faces get w = 0 instead).
/// The caller updates φ ← exp_update(chart, φ, w).
/// Throws DegenerateLinearizationError (with a null-space dimension estimate)
/// when the assembled system is singular.
Mat newton_step(const Mat& phi, const ConstitutiveDensity& cd, const LoadingDensity& load,
                const SpaceChart& chart, const BodyGrid& grid, const NewtonOptions& opts = {});

/// Pointwise exponential update of a configuration slice.
Mat exp_update(const SpaceChart& chart, const Mat& phi, const Mat& w, int steps = 32);

}  // namespace manidyn

#pragma once

#include <vector>

#include "manidyn/chart.hpp"
#include "manidyn/types.hpp"

namespace manidyn {

/// Point + velocity on the space manifold, in chart coordinates.
struct GeodesicState {
    Vec position;
    Vec velocity;
};

/// G(y)^{-1} by direct small-matrix solve.
/// Throws DegenerateMetricError naming the point when G is singular.
Mat metric_inverse(const SpaceChart& chart, const Vec& y);

/// Levi-Civita connection coefficients
///   Γ^i_{jk} = ½ g^{il} (∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk}),
/// returned as Tensor(i,j,k), symmetric in (j,k) by construction.
Tensor christoffel(const SpaceChart& chart, const Vec& y);

/// ∂_p Γ^i_{jk} as Tensor(p,i,j,k). Uses the closed-form product rule when
/// the chart carries second metric derivatives, otherwise central differences
/// of christoffel with step h_G (requires stencil room inside the chart box).
Tensor christoffel_derivative(const SpaceChart& chart, const Vec& y);

/// Curvature tensor with the convention R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z,
///   R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} − Γ^i_{lm} Γ^m_{kj},
/// so that (R(X,Y)Z)^i = R^i_{jkl} X^k Y^l Z^j. Antisymmetric in (k,l);
/// satisfies the first Bianchi identity in (j,k,l).
Tensor curvature(const SpaceChart& chart, const Vec& y);

/// (R(X,Y)Z)^i contraction helper.
Vec curvature_action(const Tensor& R, const Vec& X, const Vec& Y, const Vec& Z);

/// Exponential map: integrates the geodesic equation
///   ÿ^i + Γ^i_{jk} ẏ^j ẏ^k = 0
/// over parameter [0,1] with `steps` classical RK4 steps, returning the final
/// position and velocity. G(ẏ,ẏ) is conserved to integrator order.
/// Throws ChartExitError with the exit parameter if the trajectory leaves
/// the chart box.
GeodesicState exp_map(const SpaceChart& chart, const GeodesicState& state, int steps = 64);

struct JacobiResult {
    Vec value;              // J(s)
    Vec covariant_rate;     // DJ/ds at s
    GeodesicState geodesic; // base geodesic state at s
};

/// Jacobi field along the geodesic t ↦ exp(t v) with J(0)=0, DJ/ds(0)=w,
/// integrating D²J/ds² = −R(J, γ̇)γ̇ as a first-order system together with
/// the geodesic itself. Evaluated at parameter s ∈ [0,1].
JacobiResult jacobi_field(const SpaceChart& chart, const Vec& y, const Vec& v, const Vec& w,
                          double s, int steps = 64);

/// Parallel transport of the vector u along the geodesic t ↦ exp(t v),
/// from t=0 to t=1: solves Du/dt = 0.
Vec parallel_transport(const SpaceChart& chart, const Vec& y, const Vec& v, const Vec& u,
                       int steps = 64);

/// Transport of a co-vector from the far end of the geodesic t ↦ exp(t v)
/// back to its start: the components lambda are given at exp(v) and returned
/// at y. Dual transport satisfies λ̇_j = Γ^k_{ij} γ̇^i λ_k along the curve.
Vec transport_covector_to_base(const SpaceChart& chart, const Vec& y, const Vec& v,
                               const Vec& lambda_at_end, int steps = 64);

struct PathDerivative {
    Vec value;
    int stencil_order;  // 2 everywhere; endpoints use one-sided stencils
};

/// Covariant derivative of a field along a sampled path:
///   (Du/dt)^i = u̇^i + Γ^i_{jk}(y(t)) ẏ^j u^k,
/// with ẏ, u̇ by central differences at interior indices and second-order
/// one-sided differences at the ends of the sample.
PathDerivative covariant_derivative_along_path(const SpaceChart& chart,
                                               const std::vector<Vec>& path,
                                               const std::vector<Vec>& field, double dt,
                                               int index);

}  // namespace manidyn

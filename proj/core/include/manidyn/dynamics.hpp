#pragma once

#include <memory>
#include <optional>

#include "manidyn/constitutive.hpp"

namespace manidyn {

/// Interior and boundary parts of the equations of motion evaluated at one
/// time slice. Components carry the co-vector index of the force pairing.
struct ResidualField {
    Mat interior;            // points × m
    BoundaryField boundary;  // per face, face-points × m
};

/// Interior residual at time t:
///   r_j = ρ G_{ij} A^i − ρ b_j − (divS)_j,   S = ψ ∘ j¹κ_t,
/// which vanishes to scheme order on exact solutions.
Mat interior_residual(const Motion& motion, const ConstitutiveDensity& cd,
                      const LoadingDensity& load, const BodyGrid& grid,
                      const SpaceChart& chart, int t,
                      DivergencePath path = DivergencePath::composed);

/// Boundary residual at time t: (p_σS)_j − 𝒯_j per face point, with the
/// outward co-normal contraction.
BoundaryField boundary_residual(const Motion& motion, const ConstitutiveDensity& cd,
                                const LoadingDensity& load, const BodyGrid& grid,
                                const SpaceChart& chart, int t);

/// Static residuals of a single configuration slice: the interior part drops
/// the inertial term (a stationary motion has V = 0, hence A = 0).
ResidualField equilibrium_residual(const Mat& phi, const ConstitutiveDensity& cd,
                                   const LoadingDensity& load, const BodyGrid& grid,
                                   const SpaceChart& chart,
                                   DivergencePath path = DivergencePath::composed);

struct SimulateOptions {
    bool clamp_boundary = false;   // hold ∂B points at their initial values
    double blowup_bound = 1e6;     // chart-coordinate / velocity norm bound
    int picard_iterations = 3;     // closure of the velocity-dependent term
};

/// Explicit central (leapfrog-style) integration of the semi-discrete system
///   κ̈^i = −Γ^i_{lk} κ̇^l κ̇^k + ρ⁻¹ G^{ij} [(divS)_j + ρ b_j]
/// from initial configuration phi0 and velocity v0. The velocity entering the
/// Γ-term is the central difference at the current step, closed by fixed-point
/// iteration so the scheme stays second order. Stability is the caller's
/// burden (CFL-style step restriction).
Motion simulate(const Mat& phi0, const Mat& v0, const ConstitutiveDensity& cd,
                const LoadingDensity& load, const BodyGrid& grid, const SpaceChart& chart,
                double dt, int steps, const SimulateOptions& opts = {});

/// Kinetic plus stored energy of one slice: ½∫G(V,V)ρ dx + ∫ℒ ρ dx.
double energy(const Motion& motion, const HyperelasticLagrangian& lag, const BodyGrid& grid,
              const SpaceChart& chart, int t);

}  // namespace manidyn

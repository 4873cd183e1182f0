#pragma once

#include <cstdint>
#include <string>

#include "manidyn/linearize.hpp"

namespace manidyn {

/// Outcome of a brute-force check: the worst defect seen and the measured
/// convergence slope of the defect across step halvings (log-log least
/// squares over >= 3 levels).
struct DefectReport {
    std::string name;
    int samples = 0;
    double max_defect = 0.0;
    double convergence_slope = 0.0;
    double nominal_slope = 0.0;
    std::vector<double> level_steps;
    std::vector<double> level_defects;

    /// Slope no more than `margin` below nominal (and defect finite).
    bool slope_ok(double margin = 0.5) const {
        return std::isfinite(max_defect) && convergence_slope >= nominal_slope - margin;
    }
};

/// Least-squares slope of log(defect) against log(step).
double fit_slope(const std::vector<double>& steps, const std::vector<double>& defects);

/// How perturbed co-vector residuals are brought back to the base frame.
/// `parallel` integrates the dual transport equation along the perturbation
/// geodesic; `naive` compares raw components (wrong on curved targets, kept
/// to demonstrate exactly that).
enum class TransportMode { parallel, naive };

struct FdDerivative {
    Mat interior;            // points × m
    BoundaryField boundary;  // per face
};

/// Central finite difference of the equations of motion under the pointwise
/// exponential perturbation κ_s = exp_κ(s·w):
///   d/ds [ transported residual(κ_s) ] at s = 0, step eps.
/// This is the independent derivative the linearized operator is tested
/// against. The motion must stay inside the chart at s = ±eps.
FdDerivative fd_force_derivative(const Motion& motion, const DisplacementField& w,
                                 const ConstitutiveDensity& cd, const SpaceChart& chart,
                                 const BodyGrid& grid, int t, double eps,
                                 TransportMode mode = TransportMode::parallel,
                                 const LoadingDensity& load = {});

/// Transported nonlinear residual at the exponentially perturbed motion
/// exp_κ(w); used for the affine (constant + linear) consistency check.
FdDerivative transported_residual(const Motion& motion, const DisplacementField& w,
                                  const ConstitutiveDensity& cd, const SpaceChart& chart,
                                  const BodyGrid& grid, int t,
                                  TransportMode mode = TransportMode::parallel,
                                  const LoadingDensity& load = {});

/// Defect of metric compatibility on the configuration space: the s-derivative
/// at s = 0 of the pairing of Jacobi-transported fields along exponentially
/// perturbed configurations,
///   d/ds ∫ G_{exp(sη)}( J_{sη,u}(1), J_{sη,w}(1) ) ρ dx,
/// over `samples` random smooth (φ, η, u, w), refined simultaneously in the
/// differencing step and the integrator step across `levels` halvings.
DefectReport metricity_defect(const SpaceChart& chart, const BodyGrid& grid, int samples,
                              int levels = 3, std::uint32_t seed = 2024,
                              double eps0 = 0.05, int steps0 = 64);

/// Defect of the Jacobi rescaling identity J_{tv,w}(s) = J_{v,w/t}(ts) over a
/// (t,s) sample grid, measured across integrator-step halvings.
DefectReport jacobi_scaling_defect(const SpaceChart& chart, const Vec& y, const Vec& v,
                                   const Vec& w, int levels = 3, int steps0 = 125);

/// Defect of the normal-coordinate form of Jacobi fields, J(t) = t·w in
/// normal coordinates at the base point: built from a Gram–Schmidt frame and
/// inversion of the exponential map by Newton shooting, measured across
/// halvings of t.
DefectReport normal_coordinate_jacobi_check(const SpaceChart& chart, const Vec& y,
                                            const Vec& v, const Vec& w, int levels = 4,
                                            double t0 = 0.4, int steps = 256);

/// Smooth random fields (low-order Fourier modes, fixed seed) used by the
/// sampling oracles and the consistency sweeps. Displacement fields modulate
/// two spatial fields with O(1)-frequency profiles in absolute time.
Mat random_smooth_slice(const BodyGrid& grid, int m, double amplitude, std::uint32_t seed,
                        int modes = 3);
DisplacementField random_smooth_displacement(const BodyGrid& grid, int m, int slices,
                                             double dt, double amplitude, std::uint32_t seed,
                                             int modes = 3);

}  // namespace manidyn

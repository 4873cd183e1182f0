#pragma once

#include <string>

#include "manidyn/oracle.hpp"
#include "manidyn/scenario.hpp"

namespace manidyn {

/// ε-sweep comparison of the linear part of the assembled linearization
/// against the finite-difference force derivative. The defect decreases like
/// ε² until it hits the discretization floor; `rel_err` is the floor relative
/// to the linear part's scale, `slope` the measured pre-floor slope (a sweep
/// that sits on the floor everywhere has nothing to measure and reports
/// slope_measurable = false).
struct ConsistencyReport {
    std::string name;
    double rel_err = 0.0;
    double slope = 0.0;
    bool slope_measurable = false;
    double boundary_rel_err = 0.0;
    bool boundary_included = false;
    std::vector<double> eps_levels;
    std::vector<double> defects;
    std::vector<double> boundary_defects;

    bool pass(double tol, double slope_lo = 1.7, double slope_hi = 2.3) const {
        if (!(rel_err <= tol)) return false;
        if (boundary_included && !(boundary_rel_err <= tol)) return false;
        if (slope_measurable && (slope < slope_lo || slope > slope_hi)) return false;
        return true;
    }
};

ConsistencyReport linearization_consistency(const Motion& motion, const DisplacementField& w,
                                            const ConstitutiveDensity& cd,
                                            const SpaceChart& chart, const BodyGrid& grid,
                                            int t, double eps0, int levels,
                                            const LinearizeOptions& opts = {},
                                            bool include_boundary = false,
                                            TransportMode mode = TransportMode::parallel);

/// Sup-norm defect between the transported nonlinear residual at exp_κ(εw)
/// and the affine map evaluated at εw, relative to the residual scale. This
/// is the arbitration instrument for the divergence-coupling reading: the
/// affine-constant reading drives it to O(ε²)+O(h²), the quadratic reading
/// leaves an O(1) offset wherever the stress divergence is nonzero.
double affine_consistency_defect(const Motion& motion, const DisplacementField& w,
                                 const ConstitutiveDensity& cd, const SpaceChart& chart,
                                 const BodyGrid& grid, int t, double eps,
                                 const LinearizeOptions& opts = {});

DisplacementField scale_displacement(const DisplacementField& w, double s);

/// Pointwise-geodesic motion slices[n] = exp(φ0, n·dt·v0); the generic
/// in-chart motion used by verification sweeps.
Motion geodesic_flow_motion(const SpaceChart& chart, const BodyGrid& grid, const Mat& phi0,
                            const Mat& v0, int steps, double dt, int exp_steps = 64);

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// The defect battery applicable to a scenario (metricity, Jacobi scaling,
/// normal coordinates, representation identity, linearization consistency,
/// the flagged-alternative falsifications, flat reductions, geodesic-flow
/// reduction for the free body).
VerifyReport verify_scenario(const Scenario& s);

enum class RunMode { simulate, equilibrium, linearize, verify, geodesic };
RunMode parse_mode(const std::string& name);

struct RunResult {
    int exit_code = 0;
    std::string report;
};

/// Executes one scenario in one mode, writing artifacts under the scenario's
/// output directory. Exit codes: 0 pass, 1 defect failure (verify), 2 parse
/// or usage error, 3 runtime error (chart exit, blow-up, solver failure) —
/// the CLI maps thrown exceptions onto 2/3.
RunResult run_scenario(const Scenario& s, RunMode mode);

}  // namespace manidyn

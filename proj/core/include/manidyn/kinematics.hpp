#pragma once

#include <vector>

#include "manidyn/chart.hpp"
#include "manidyn/geometry.hpp"
#include "manidyn/grid.hpp"

namespace manidyn {

/// Discretized time-dependent configuration of the body in the space chart.
/// slices[n] holds the chart coordinates of every grid point at time n·dt
/// (rows = grid points, cols = space components).
struct Motion {
    BodyGrid grid;
    double dt = 0.0;
    std::vector<Mat> slices;

    int steps() const { return static_cast<int>(slices.size()) - 1; }
    int space_dim() const { return static_cast<int>(slices.front().cols()); }

    /// Checks that all values lie in the chart box and that the spatial
    /// Jacobian has full rank d at every point of every slice (smallest
    /// singular value above `embedding_tol`). Throws on violation.
    void validate(const SpaceChart& chart, double embedding_tol = 1e-8) const;
};

/// Constant-in-time motion from a single configuration slice.
Motion stationary_motion(const BodyGrid& grid, const Mat& phi, int steps, double dt);

/// Vector field along a motion, components in the coordinate frame of the
/// space chart pulled back by the configuration. Same slicing as Motion.
struct DisplacementField {
    std::vector<Mat> slices;
    int steps() const { return static_cast<int>(slices.size()) - 1; }
};

DisplacementField zero_displacement(const Motion& motion);

/// Pointwise 1-jet of one time slice: values y = κ(x) and the spatial
/// Jacobian first[p](i,α) = ∂κ^i/∂x^α. `second[p](i,α,β)` carries the grid
/// second derivatives used by the chain-rule divergence path and by the
/// linearized coefficient fields.
struct Jet1Field {
    Mat y;
    std::vector<Mat> first;
    std::vector<Tensor> second;
};

Jet1Field jet(const Motion& motion, int t);
Jet1Field jet_of_slice(const BodyGrid& grid, const Mat& slice);

/// V = ∂κ/∂t with central stencils inside and one-sided at the time ends.
DisplacementField velocity(const Motion& motion);
/// Velocity at a single time index.
Mat velocity_slice(const Motion& motion, int t);

/// Covariant acceleration A^i = ∂²κ^i/∂t² + Γ^i_{lk} ∂κ^l/∂t ∂κ^k/∂t.
DisplacementField acceleration(const Motion& motion, const SpaceChart& chart);
Mat acceleration_slice(const Motion& motion, const SpaceChart& chart, int t);

/// D²w/dt² along each material world line; reduces to ∂²w/∂t² when the
/// connection coefficients vanish.
DisplacementField second_covariant_time_derivative(const Motion& motion,
                                                   const DisplacementField& w,
                                                   const SpaceChart& chart);
Mat second_covariant_time_derivative_slice(const Motion& motion, const DisplacementField& w,
                                           const SpaceChart& chart, int t);

/// Weak pairing of two displacement fields along a motion,
///   ∫∫ G_κ(u,w) ρ dx dt
/// by the trapezoid rule in x and t. A single-slice motion integrates over
/// the body only.
double pair(const Motion& motion, const SpaceChart& chart, const DisplacementField& u,
            const DisplacementField& w);

/// Spatial-only pairing of fields over one configuration slice.
double pair_spatial(const BodyGrid& grid, const SpaceChart& chart, const Mat& kappa,
                    const Mat& u, const Mat& w);

}  // namespace manidyn

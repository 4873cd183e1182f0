#pragma once

#include <functional>
#include <vector>

#include "manidyn/types.hpp"

namespace manidyn {

/// One open face of the unit box [0,1]^d: outward co-normal is ±ê_axis.
struct Face {
    int axis = 0;
    int side = 0;  // 0 -> x_axis = 0 (co-normal -1), 1 -> x_axis = 1 (co-normal +1)
    std::vector<int> points;  // flat grid indices lying on this face
    double conormal() const { return side == 0 ? -1.0 : 1.0; }
};

/// Compact body: uniform grid on the unit box [0,1]^d with a mass density.
/// d ∈ {1,2}; N points per axis, spacing h = 1/(N−1); the mass form is
/// ρ dx¹∧…∧dx^d.
class BodyGrid {
public:
    BodyGrid(int dim, int n, Vec rho);
    BodyGrid(int dim, int n, double constant_rho = 1.0);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double h() const { return h_; }
    int points() const { return points_; }
    const Vec& rho() const { return rho_; }
    double rho(int p) const { return rho_[p]; }

    int flat(const std::vector<int>& idx) const;
    std::vector<int> unflat(int p) const;
    Vec coord(int p) const;

    /// Flat index of the point `steps` grid cells away along an axis.
    int shift(int p, int axis, int steps) const;
    /// Index along one axis of a flat point.
    int axis_index(int p, int axis) const;

    bool is_boundary(int p) const;
    const std::vector<Face>& faces() const { return faces_; }

    /// Trapezoid quadrature weight of the grid point (already includes h^d).
    double weight(int p) const;
    /// Trapezoid weight on a face (includes h^{d−1}).
    double face_weight(const Face& f, int k) const;

    /// ∫_B f dx by the trapezoid rule (f given per point).
    double integrate(const Vec& f) const;
    /// ∫_B f ρ dx (mass-form quadrature).
    double integrate_mass(const Vec& f) const;
    /// ∮_{∂B} of per-face samples (values[fi][k] matches faces()[fi].points[k]).
    double integrate_boundary(const std::vector<Vec>& values) const;

    /// First/second derivative of the columns of f along an axis.
    /// Central stencils inside, second-order one-sided at the box boundary.
    Mat d1(const Mat& f, int axis) const;
    Mat d2(const Mat& f, int axis) const;
    /// Mixed derivative as composition d1(axis_a) ∘ d1(axis_b).
    Mat dmixed(const Mat& f, int axis_a, int axis_b) const;

private:
    void init();
    int dim_;
    int n_;
    double h_;
    int points_;
    Vec rho_;
    std::vector<Face> faces_;
};

/// Evaluate a scalar function of x on every grid point.
Vec grid_scalar(const BodyGrid& grid, const std::function<double(const Vec&)>& f);
/// Evaluate an m-component function of x on every grid point (rows = points).
Mat grid_field(const BodyGrid& grid, int m, const std::function<Vec(const Vec&)>& f);

}  // namespace manidyn

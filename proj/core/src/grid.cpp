#include "manidyn/grid.hpp"

#include <stdexcept>

#include "manidyn/errors.hpp"

namespace manidyn {

BodyGrid::BodyGrid(int dim, int n, Vec rho) : dim_(dim), n_(n), rho_(std::move(rho)) {
    init();
    if (rho_.size() != points_) throw Error("BodyGrid: rho size does not match grid");
    if ((rho_.array() <= 0.0).any()) throw Error("BodyGrid: mass density must be positive");
}

BodyGrid::BodyGrid(int dim, int n, double constant_rho) : dim_(dim), n_(n) {
    init();
    if (constant_rho <= 0.0) throw Error("BodyGrid: mass density must be positive");
    rho_ = Vec::Constant(points_, constant_rho);
}

void BodyGrid::init() {
    if (dim_ != 1 && dim_ != 2) throw Error("unsupported body dimension (d must be 1 or 2)");
    if (n_ < 5) throw Error("BodyGrid: need at least 5 points per axis for stencil room");
    h_ = 1.0 / (n_ - 1);
    points_ = 1;
    for (int a = 0; a < dim_; ++a) points_ *= n_;

    for (int axis = 0; axis < dim_; ++axis)
        for (int side = 0; side < 2; ++side) {
            Face f;
            f.axis = axis;
            f.side = side;
            const int edge = side == 0 ? 0 : n_ - 1;
            if (dim_ == 1) {
                f.points = {edge};
            } else {
                f.points.reserve(n_);
                for (int k = 0; k < n_; ++k)
                    f.points.push_back(axis == 0 ? flat({edge, k}) : flat({k, edge}));
            }
            faces_.push_back(std::move(f));
        }
}

int BodyGrid::flat(const std::vector<int>& idx) const {
    int p = 0;
    for (int a = 0; a < dim_; ++a) p = p * n_ + idx[a];
    return p;
}

std::vector<int> BodyGrid::unflat(int p) const {
    std::vector<int> idx(dim_);
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = p % n_;
        p /= n_;
    }
    return idx;
}

Vec BodyGrid::coord(int p) const {
    auto idx = unflat(p);
    Vec x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = h_ * idx[a];
    return x;
}

int BodyGrid::shift(int p, int axis, int steps) const {
    int s = 1;
    for (int a = dim_ - 1; a > axis; --a) s *= n_;
    return p + steps * s;
}

int BodyGrid::axis_index(int p, int axis) const { return unflat(p)[axis]; }

bool BodyGrid::is_boundary(int p) const {
    for (int v : unflat(p))
        if (v == 0 || v == n_ - 1) return true;
    return false;
}

double BodyGrid::weight(int p) const {
    double w = 1.0;
    for (int v : unflat(p)) w *= (v == 0 || v == n_ - 1) ? 0.5 : 1.0;
    for (int a = 0; a < dim_; ++a) w *= h_;
    return w;
}

double BodyGrid::face_weight(const Face& f, int k) const {
    if (dim_ == 1) return 1.0;
    (void)f;
    return ((k == 0 || k == n_ - 1) ? 0.5 : 1.0) * h_;
}

double BodyGrid::integrate(const Vec& f) const {
    double s = 0.0;
    for (int p = 0; p < points_; ++p) s += weight(p) * f[p];
    return s;
}

double BodyGrid::integrate_mass(const Vec& f) const {
    double s = 0.0;
    for (int p = 0; p < points_; ++p) s += weight(p) * rho_[p] * f[p];
    return s;
}

double BodyGrid::integrate_boundary(const std::vector<Vec>& values) const {
    double s = 0.0;
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
        const Face& f = faces_[fi];
        for (std::size_t k = 0; k < f.points.size(); ++k)
            s += face_weight(f, static_cast<int>(k)) * values[fi][static_cast<Eigen::Index>(k)];
    }
    return s;
}

namespace {

// Index stepping along one axis of the flattened row-major grid.
inline int stride_of(int dim, int n, int axis) {
    int s = 1;
    for (int a = dim - 1; a > axis; --a) s *= n;
    return s;
}

}  // namespace

Mat BodyGrid::d1(const Mat& f, int axis) const {
    // Central inside. The one-sided end stencil (−4,7,−4,1)/2h is second
    // order with leading error +h²/6 f''', the same coefficient as the
    // central stencil: the error field of a differentiated grid function is
    // then smooth across the boundary, so composed fields built from these
    // derivatives can be differenced again without losing an order at the
    // ends.
    const int s = stride_of(dim_, n_, axis);
    Mat out(f.rows(), f.cols());
    for (int p = 0; p < points_; ++p) {
        const int i = unflat(p)[axis];
        if (i > 0 && i < n_ - 1)
            out.row(p) = (f.row(p + s) - f.row(p - s)) / (2.0 * h_);
        else if (i == 0)
            out.row(p) = (-4.0 * f.row(p) + 7.0 * f.row(p + s) - 4.0 * f.row(p + 2 * s) +
                          f.row(p + 3 * s)) /
                         (2.0 * h_);
        else
            out.row(p) = (4.0 * f.row(p) - 7.0 * f.row(p - s) + 4.0 * f.row(p - 2 * s) -
                          f.row(p - 3 * s)) /
                         (2.0 * h_);
    }
    return out;
}

Mat BodyGrid::d2(const Mat& f, int axis) const {
    const int s = stride_of(dim_, n_, axis);
    Mat out(f.rows(), f.cols());
    for (int p = 0; p < points_; ++p) {
        const int i = unflat(p)[axis];
        if (i > 0 && i < n_ - 1)
            out.row(p) = (f.row(p + s) - 2.0 * f.row(p) + f.row(p - s)) / (h_ * h_);
        else if (i == 0)
            out.row(p) = (2.0 * f.row(p) - 5.0 * f.row(p + s) + 4.0 * f.row(p + 2 * s) -
                          f.row(p + 3 * s)) /
                         (h_ * h_);
        else
            out.row(p) = (2.0 * f.row(p) - 5.0 * f.row(p - s) + 4.0 * f.row(p - 2 * s) -
                          f.row(p - 3 * s)) /
                         (h_ * h_);
    }
    return out;
}

Mat BodyGrid::dmixed(const Mat& f, int axis_a, int axis_b) const {
    return d1(d1(f, axis_b), axis_a);
}

Vec grid_scalar(const BodyGrid& grid, const std::function<double(const Vec&)>& f) {
    Vec out(grid.points());
    for (int p = 0; p < grid.points(); ++p) out[p] = f(grid.coord(p));
    return out;
}

Mat grid_field(const BodyGrid& grid, int m, const std::function<Vec(const Vec&)>& f) {
    Mat out(grid.points(), m);
    for (int p = 0; p < grid.points(); ++p) out.row(p) = f(grid.coord(p)).transpose();
    return out;
}

}  // namespace manidyn

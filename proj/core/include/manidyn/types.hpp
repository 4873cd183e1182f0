#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace manidyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense little tensor of rank 3..6 with row-major flat storage.
/// Index ranges are tiny here (space dim m <= 2 in the chart catalog,
/// body dim d in {1,2}), so no effort is spent on layout tricks.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
        strides_.assign(dims_.size(), 1);
        for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
            strides_[i] = strides_[i + 1] * dims_[i + 1];
        std::size_t n = 1;
        for (int d : dims_) n *= static_cast<std::size_t>(d);
        v_.assign(n, 0.0);
    }

    static Tensor zeros(std::initializer_list<int> dims) {
        return Tensor(std::vector<int>(dims));
    }

    int rank() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(int i, int j, int k) {
        assert(rank() == 3);
        return v_[idx3(i, j, k)];
    }
    double operator()(int i, int j, int k) const {
        assert(rank() == 3);
        return v_[idx3(i, j, k)];
    }
    double& operator()(int i, int j, int k, int l) {
        assert(rank() == 4);
        return v_[idx3(i, j, k) + static_cast<std::size_t>(l) * strides_[3]];
    }
    double operator()(int i, int j, int k, int l) const {
        assert(rank() == 4);
        return v_[idx3(i, j, k) + static_cast<std::size_t>(l) * strides_[3]];
    }
    double& operator()(int i, int j, int k, int l, int p) {
        assert(rank() == 5);
        return v_[idx5(i, j, k, l, p)];
    }
    double operator()(int i, int j, int k, int l, int p) const {
        assert(rank() == 5);
        return v_[idx5(i, j, k, l, p)];
    }
    double& operator()(int i, int j, int k, int l, int p, int q) {
        assert(rank() == 6);
        return v_[idx5(i, j, k, l, p) + static_cast<std::size_t>(q) * strides_[5]];
    }
    double operator()(int i, int j, int k, int l, int p, int q) const {
        assert(rank() == 6);
        return v_[idx5(i, j, k, l, p) + static_cast<std::size_t>(q) * strides_[5]];
    }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    Tensor& operator+=(const Tensor& o) {
        assert(dims_ == o.dims_);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        assert(dims_ == o.dims_);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Tensor& operator*=(double a) {
        for (double& x : v_) x *= a;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    std::size_t idx3(int i, int j, int k) const {
        return static_cast<std::size_t>(i) * strides_[0] +
               static_cast<std::size_t>(j) * strides_[1] +
               static_cast<std::size_t>(k) * strides_[2];
    }
    std::size_t idx5(int i, int j, int k, int l, int p) const {
        return idx3(i, j, k) + static_cast<std::size_t>(l) * strides_[3] +
               static_cast<std::size_t>(p) * strides_[4];
    }

    std::vector<int> dims_;
    std::vector<std::size_t> strides_;
    std::vector<double> v_;
};

/// Axis-aligned box, used as the validity region of a coordinate chart.
struct Box {
    Vec lo;
    Vec hi;

    bool contains(const Vec& y, double margin = 0.0) const {
        for (int i = 0; i < y.size(); ++i)
            if (!(y[i] >= lo[i] + margin && y[i] <= hi[i] - margin)) return false;
        return true;
    }
    double min_margin(const Vec& y) const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < y.size(); ++i)
            m = std::min({m, y[i] - lo[i], hi[i] - y[i]});
        return m;
    }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace manidyn

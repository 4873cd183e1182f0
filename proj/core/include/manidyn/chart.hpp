#pragma once

#include <functional>
#include <memory>
#include <string>

#include "manidyn/types.hpp"

namespace manidyn {

/// The space manifold in a single coordinate chart.
///
/// `metric` returns the symmetric positive-definite matrix G(y).
/// `metric_derivative` returns the rank-3 array dG(k,i,j) = ∂_k G_ij; when
/// absent it is replaced by central differences of `metric` with step `h_G`.
/// `metric_second_derivative` returns d2G(k,l,i,j) = ∂_k ∂_l G_ij and is
/// optional in the same way (differences of the first derivative).
///
/// Bodies and motions must fit inside `domain`; every operation that walks
/// the chart checks it and reports the offending point or parameter.
struct SpaceChart {
    int dim = 0;
    std::string name;
    Box domain;
    double h_G = 1e-5;

    std::function<Mat(const Vec&)> metric;
    std::function<Tensor(const Vec&)> metric_derivative;         // optional
    std::function<Tensor(const Vec&)> metric_second_derivative;  // optional

    bool has_closed_form_derivative() const { return static_cast<bool>(metric_derivative); }
    bool has_closed_form_second_derivative() const {
        return static_cast<bool>(metric_second_derivative);
    }

    /// dG with the closed form when registered, else central differences.
    Tensor metric_d1(const Vec& y) const;
    /// d2G with the closed form when registered, else differences of metric_d1.
    Tensor metric_d2(const Vec& y) const;
};

/// Catalog lookup: "euclidean:m", "sphere", "half-plane", plus any name
/// registered programmatically via register_chart.
std::shared_ptr<const SpaceChart> make_chart(const std::string& name);

void register_chart(const std::string& name,
                    std::function<std::shared_ptr<const SpaceChart>()> factory);

std::shared_ptr<const SpaceChart> make_euclidean_chart(int m);
std::shared_ptr<const SpaceChart> make_sphere_chart();
std::shared_ptr<const SpaceChart> make_half_plane_chart();

}  // namespace manidyn

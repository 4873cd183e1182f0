#include "manidyn/chart.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "manidyn/errors.hpp"

namespace manidyn {

Tensor SpaceChart::metric_d1(const Vec& y) const {
    if (metric_derivative) return metric_derivative(y);
    const int m = dim;
    Tensor dG = Tensor::zeros({m, m, m});
    Vec yp = y, ym = y;
    for (int k = 0; k < m; ++k) {
        yp[k] = y[k] + h_G;
        ym[k] = y[k] - h_G;
        Mat Gp = metric(yp);
        Mat Gm = metric(ym);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) dG(k, i, j) = (Gp(i, j) - Gm(i, j)) / (2.0 * h_G);
        yp[k] = y[k];
        ym[k] = y[k];
    }
    return dG;
}

Tensor SpaceChart::metric_d2(const Vec& y) const {
    if (metric_second_derivative) return metric_second_derivative(y);
    const int m = dim;
    // A slightly larger step: we are differencing a quantity that may itself
    // be a central difference.
    const double h = (metric_derivative ? h_G : std::sqrt(h_G));
    Tensor d2G = Tensor::zeros({m, m, m, m});
    Vec yp = y, ym = y;
    for (int k = 0; k < m; ++k) {
        yp[k] = y[k] + h;
        ym[k] = y[k] - h;
        Tensor dp = metric_d1(yp);
        Tensor dm = metric_d1(ym);
        for (int l = 0; l < m; ++l)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    d2G(k, l, i, j) = (dp(l, i, j) - dm(l, i, j)) / (2.0 * h);
        yp[k] = y[k];
        ym[k] = y[k];
    }
    return d2G;
}

namespace {

Box box_of(std::initializer_list<double> lo, std::initializer_list<double> hi) {
    Box b;
    b.lo = Vec(static_cast<Eigen::Index>(lo.size()));
    b.hi = Vec(static_cast<Eigen::Index>(hi.size()));
    int i = 0;
    for (double v : lo) b.lo[i++] = v;
    i = 0;
    for (double v : hi) b.hi[i++] = v;
    return b;
}

std::map<std::string, std::function<std::shared_ptr<const SpaceChart>()>>& registry() {
    static std::map<std::string, std::function<std::shared_ptr<const SpaceChart>()>> r;
    return r;
}
std::mutex registry_mutex;

}  // namespace

std::shared_ptr<const SpaceChart> make_euclidean_chart(int m) {
    auto c = std::make_shared<SpaceChart>();
    c->dim = m;
    c->name = "euclidean:" + std::to_string(m);
    c->domain.lo = Vec::Constant(m, -1e6);
    c->domain.hi = Vec::Constant(m, 1e6);
    c->metric = [m](const Vec&) { return Mat::Identity(m, m); };
    c->metric_derivative = [m](const Vec&) { return Tensor::zeros({m, m, m}); };
    c->metric_second_derivative = [m](const Vec&) { return Tensor::zeros({m, m, m, m}); };
    return c;
}

std::shared_ptr<const SpaceChart> make_sphere_chart() {
    // Unit round sphere, polar coordinates y = (theta, phi) with
    // G = diag(1, sin^2 theta). Poles are excluded from the chart box.
    auto c = std::make_shared<SpaceChart>();
    c->dim = 2;
    c->name = "sphere";
    c->domain = box_of({0.05, -8.0 * M_PI}, {M_PI - 0.05, 8.0 * M_PI});
    c->metric = [](const Vec& y) {
        Mat G = Mat::Identity(2, 2);
        const double s = std::sin(y[0]);
        G(1, 1) = s * s;
        return G;
    };
    c->metric_derivative = [](const Vec& y) {
        Tensor dG = Tensor::zeros({2, 2, 2});
        dG(0, 1, 1) = std::sin(2.0 * y[0]);  // ∂_θ sin²θ
        return dG;
    };
    c->metric_second_derivative = [](const Vec& y) {
        Tensor d2G = Tensor::zeros({2, 2, 2, 2});
        d2G(0, 0, 1, 1) = 2.0 * std::cos(2.0 * y[0]);
        return d2G;
    };
    return c;
}

std::shared_ptr<const SpaceChart> make_half_plane_chart() {
    // Hyperbolic half-plane, y = (y1, y2) with y2 > 0 and
    // G = diag(1/y2^2, 1/y2^2); constant sectional curvature -1.
    auto c = std::make_shared<SpaceChart>();
    c->dim = 2;
    c->name = "half-plane";
    c->domain = box_of({-1e6, 1e-3}, {1e6, 1e6});
    c->metric = [](const Vec& y) {
        const double f = 1.0 / (y[1] * y[1]);
        Mat G = Mat::Zero(2, 2);
        G(0, 0) = f;
        G(1, 1) = f;
        return G;
    };
    c->metric_derivative = [](const Vec& y) {
        Tensor dG = Tensor::zeros({2, 2, 2});
        const double f = -2.0 / (y[1] * y[1] * y[1]);
        dG(1, 0, 0) = f;
        dG(1, 1, 1) = f;
        return dG;
    };
    c->metric_second_derivative = [](const Vec& y) {
        Tensor d2G = Tensor::zeros({2, 2, 2, 2});
        const double f = 6.0 / (y[1] * y[1] * y[1] * y[1]);
        d2G(1, 1, 0, 0) = f;
        d2G(1, 1, 1, 1) = f;
        return d2G;
    };
    return c;
}

void register_chart(const std::string& name,
                    std::function<std::shared_ptr<const SpaceChart>()> factory) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    registry()[name] = std::move(factory);
}

std::shared_ptr<const SpaceChart> make_chart(const std::string& name) {
    {
        std::lock_guard<std::mutex> lock(registry_mutex);
        auto it = registry().find(name);
        if (it != registry().end()) return it->second();
    }
    if (name.rfind("euclidean:", 0) == 0) {
        const int m = std::stoi(name.substr(10));
        if (m < 1) throw Error("euclidean chart dimension must be positive: " + name);
        return make_euclidean_chart(m);
    }
    if (name == "sphere") return make_sphere_chart();
    if (name == "half-plane") return make_half_plane_chart();
    throw Error("unknown manifold name: \"" + name + "\"");
}

}  // namespace manidyn

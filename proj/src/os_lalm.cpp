#include "ldct/os_lalm.hpp"

#include <cmath>
#include <numbers>

namespace ldct {

double rho_schedule(int n, double alpha) {
    if (n < 0) throw ValidationError("rho_schedule: n must be >= 0");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw ValidationError("rho_schedule: alpha must lie in [1, 2)");
    if (n == 0) return 1.0;
    const double t = std::numbers::pi / (alpha * (n + 1));
    return t * std::sqrt(1.0 - 0.25 * t * t);
}

WeightedLeastSquares::WeightedLeastSquares(const Projector& proj, Vector y, Vector weights, int n_subsets)
    : proj_(&proj), y_(std::move(y)), w_(std::move(weights)) {
    const Geometry& geo = proj.geometry();
    if (y_.size() != geo.n_rays() || w_.size() != geo.n_rays()) {
        throw ConfigError("data term: sinogram or weight length does not match the geometry");
    }
    if (!y_.allFinite() || !w_.allFinite()) throw ValidationError("data term: non-finite sinogram or weights");
    subsets_ = partition_subsets(geo, n_subsets);
    const int nc = geo.n_channels;
    for (const auto& views : subsets_.views) {
        Vector ys(static_cast<Eigen::Index>(views.size()) * nc);
        Vector ws(ys.size());
        for (std::size_t k = 0; k < views.size(); ++k) {
            ys.segment(static_cast<Eigen::Index>(k) * nc, nc) = y_.segment(static_cast<Eigen::Index>(views[k]) * nc, nc);
            ws.segment(static_cast<Eigen::Index>(k) * nc, nc) = w_.segment(static_cast<Eigen::Index>(views[k]) * nc, nc);
        }
        y_sub_.push_back(std::move(ys));
        w_sub_.push_back(std::move(ws));
    }
    da_ = compute_majorizer_da(proj, w_);
    const double floor = 1e-12 * (da_.size() ? da_.maxCoeff() : 0.0);
    da_ = da_.cwiseMax(floor > 0.0 ? floor : 1e-12);
}

double WeightedLeastSquares::value(const Vector& x) const {
    const Vector r = proj_->forward(x) - y_;
    return 0.5 * r.cwiseProduct(w_).dot(r);
}

Vector WeightedLeastSquares::gradient(const Vector& x) const {
    const Vector r = (proj_->forward(x) - y_).cwiseProduct(w_);
    return proj_->back(r);
}

Vector WeightedLeastSquares::subset_gradient(const Vector& x, int subset) const {
    const auto& views = subsets_.views.at(subset);
    const Vector r = (proj_->forward(x, views) - y_sub_[subset]).cwiseProduct(w_sub_[subset]);
    return static_cast<double>(n_subsets()) * proj_->back(r, views);
}

void os_lalm_solve(const WeightedLeastSquares& data, const SmoothPenalty& penalty, Vector& x,
                   const OsLalmSettings& settings, int outer_index, OsLalmTrace* trace) {
    if (settings.iterations < 0) throw ValidationError("os-lalm: iteration count must be >= 0");
    if (!(settings.alpha >= 1.0 && settings.alpha < 2.0)) throw ValidationError("os-lalm: alpha must lie in [1, 2)");
    if (x.size() != data.projector().geometry().n_pixels()) throw ConfigError("os-lalm: image size mismatch");

    const auto& order = data.subsets().order;
    const int n_sub = data.n_subsets();
    const double alpha = settings.alpha;
    const Vector& da = data.majorizer();
    const Vector dr = penalty.majorizer();

    Vector zeta = data.subset_gradient(x, order.back());
    Vector g = zeta;
    Vector h = da.cwiseProduct(x) - zeta;
    double rho = 1.0;

    for (int k = 0; k < settings.iterations; ++k) {
        for (int mi = 0; mi < n_sub; ++mi) {
            const int m = order[mi];
            const Vector s = rho * (da.cwiseProduct(x) - h) + (1.0 - rho) * g;
            const Vector step = (s + penalty.gradient(x)).cwiseQuotient(rho * da + dr);
            x = (x - step).cwiseMax(0.0);
            if (!x.allFinite()) throw DivergenceError("os-lalm: non-finite image", outer_index, k, mi);

            zeta = data.subset_gradient(x, m);
            g = (rho / (rho + 1.0)) * (alpha * zeta + (1.0 - alpha) * g) + (1.0 / (rho + 1.0)) * g;
            h = alpha * (da.cwiseProduct(x) - zeta) + (1.0 - alpha) * h;

            if (trace) trace->rho_used.push_back(rho);
            const int n = k * n_sub + mi;
            rho = rho_schedule(n, alpha);
            if (trace) trace->n.push_back(n);
        }
    }
}

}  // namespace ldct

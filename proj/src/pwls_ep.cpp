#include <cmath>

#include "ldct/baselines.hpp"

namespace ldct {

EpPotential ep_potential(double t, double delta) {
    if (!(delta > 0.0)) throw ValidationError("ep potential: delta must be > 0");
    const double q = t / delta;
    const double root = std::sqrt(1.0 + q * q);
    return {delta * delta * (root - 1.0), t / root};
}

void EpConfig::validate() const {
    if (!(beta > 0.0)) throw ValidationError("pwls-ep: beta must be > 0");
    if (!(delta > 0.0)) throw ValidationError("pwls-ep: delta must be > 0");
    if (neighborhood != 4 && neighborhood != 8) throw ValidationError("pwls-ep: neighborhood must be 4 or 8");
    if (subsets < 1) throw ValidationError("pwls-ep: subset count must be >= 1");
    if (iterations < 0) throw ValidationError("pwls-ep: iteration count must be >= 0");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw ValidationError("pwls-ep: alpha must lie in [1, 2)");
}

EdgePreservingPenalty::EdgePreservingPenalty(int rows, int cols, const EpConfig& cfg)
    : rows_(rows), cols_(cols), beta_(cfg.beta), delta_(cfg.delta) {
    if (!(cfg.delta > 0.0) || cfg.beta < 0.0) throw ValidationError("ep penalty: need beta >= 0 and delta > 0");
    offsets_ = {{0, 1, 1.0}, {1, 0, 1.0}};
    if (cfg.neighborhood == 8) {
        offsets_.push_back({1, 1, 1.0 / std::sqrt(2.0)});
        offsets_.push_back({1, -1, 1.0 / std::sqrt(2.0)});
    } else if (cfg.neighborhood != 4) {
        throw ValidationError("ep penalty: neighborhood must be 4 or 8");
    }
    majorizer_ = Vector::Zero(static_cast<Eigen::Index>(rows) * cols);
    for_each_pair([&](long j, long k, double w) {
        majorizer_[j] += 2.0 * beta_ * w;
        majorizer_[k] += 2.0 * beta_ * w;
    });
}

template <class Visit>
void EdgePreservingPenalty::for_each_pair(Visit&& visit) const {
    for (const auto& o : offsets_) {
        for (int r = 0; r < rows_; ++r) {
            const int r2 = r + o.dr;
            if (r2 < 0 || r2 >= rows_) continue;
            for (int c = 0; c < cols_; ++c) {
                const int c2 = c + o.dc;
                if (c2 < 0 || c2 >= cols_) continue;
                visit(static_cast<long>(r) * cols_ + c, static_cast<long>(r2) * cols_ + c2, o.weight);
            }
        }
    }
}

double EdgePreservingPenalty::value(const Vector& x) const {
    double sum = 0.0;
    for_each_pair([&](long j, long k, double w) { sum += w * ep_potential(x[j] - x[k], delta_).value; });
    return beta_ * sum;
}

Vector EdgePreservingPenalty::gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for_each_pair([&](long j, long k, double w) {
        const double d = w * ep_potential(x[j] - x[k], delta_).derivative;
        g[j] += d;
        g[k] -= d;
    });
    return beta_ * g;
}

Vector reconstruct_pwls_ep(const WeightedLeastSquares& data, const EpConfig& cfg, const Vector& x_init) {
    cfg.validate();
    if (data.n_subsets() != cfg.subsets) throw ConfigError("pwls-ep: data term was built with a different subset count");
    const Geometry& geo = data.projector().geometry();
    if (x_init.size() != geo.n_pixels()) throw ConfigError("pwls-ep: initial image size mismatch");
    const EdgePreservingPenalty penalty(geo.image_rows, geo.image_cols, cfg);
    Vector x = x_init.cwiseMax(0.0);
    os_lalm_solve(data, penalty, x, OsLalmSettings{cfg.iterations, cfg.alpha});
    return x;
}

PwlsStResult reconstruct_pwls_dct(const WeightedLeastSquares& data, const PatchScheme& ps, const PwlsStConfig& cfg,
                                  const Vector& x_init, const ImageMonitor& rmse) {
    const SparsifyingTransform dct = make_dct_transform(ps.patch_rows, ps.patch_cols);
    return reconstruct_pwls_st(data, dct, ps, cfg, x_init, rmse);
}

}  // namespace ldct

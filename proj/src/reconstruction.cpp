#include "ldct/reconstruction.hpp"

namespace ldct {

void PwlsStConfig::validate() const {
    if (!(beta >= 0.0)) throw ValidationError("pwls-st: beta must be >= 0");
    if (!(gamma > 0.0)) throw ValidationError("pwls-st: gamma must be > 0");
    if (outer_iters < 0) throw ValidationError("pwls-st: outer iteration count must be >= 0");
    if (inner_iters < 1) throw ValidationError("pwls-st: inner iteration count must be >= 1");
    if (subsets < 1) throw ValidationError("pwls-st: subset count must be >= 1");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw ValidationError("pwls-st: alpha must lie in [1, 2)");
}

namespace {

void check_scheme(const SparsifyingTransform& t, const PatchScheme& ps) {
    if (t.patch_rows != ps.patch_rows || t.patch_cols != ps.patch_cols) {
        throw ConfigError("transform patch dimensions do not match the patch scheme");
    }
}

}  // namespace

TransformPenalty::TransformPenalty(const SparsifyingTransform& t, const PatchScheme& ps, double beta)
    : t_(&t), ps_(ps), beta_(beta), gram_(t.omega.transpose() * t.omega, ps) {
    check_scheme(t, ps);
    code_back_ = Vector::Zero(ps.n_pixels());
    codes_ = Matrix::Zero(t.size(), ps.n_patches());
    majorizer_ = majorizer_dr_diagonal(t, ps, beta);
}

void TransformPenalty::set_codes(const Matrix& codes) {
    if (codes.rows() != t_->size() || codes.cols() != ps_.n_patches()) {
        throw ConfigError("transform penalty: code matrix must be l x N");
    }
    codes_ = codes;
    code_back_ = aggregate_patches(t_->omega.transpose() * codes, ps_);
}

double TransformPenalty::value(const Vector& x) const {
    return beta_ * (t_->omega * extract_patches(x, ps_) - codes_).squaredNorm();
}

Vector TransformPenalty::gradient(const Vector& x) const {
    return 2.0 * beta_ * (gram_.apply(x) - code_back_);
}

Vector regularizer_gradient(const Vector& x, const Matrix& codes, const SparsifyingTransform& t,
                            const PatchScheme& ps, double beta) {
    check_scheme(t, ps);
    const Matrix residual = t.omega * extract_patches(x, ps) - codes;
    if (residual.cols() != codes.cols()) throw ConfigError("regularizer gradient: code matrix shape mismatch");
    return 2.0 * beta * aggregate_patches(t.omega.transpose() * residual, ps);
}

double compute_majorizer_dr(const SparsifyingTransform& t, const PatchScheme& ps, double beta) {
    check_scheme(t, ps);
    if (!ps.uniform_overlap()) {
        throw ConfigError("scalar D_R needs wrap-around stride-1 patches; use majorizer_dr_diagonal");
    }
    return 2.0 * beta * ps.patch_size() * t.stats.lambda_max;
}

Vector majorizer_dr_diagonal(const SparsifyingTransform& t, const PatchScheme& ps, double beta) {
    check_scheme(t, ps);
    if (ps.uniform_overlap()) return Vector::Constant(ps.n_pixels(), compute_majorizer_dr(t, ps, beta));
    return 2.0 * beta * t.stats.lambda_max * overlap_diagonal(ps);
}

Matrix sparse_coding_step(const Vector& x, const SparsifyingTransform& t, const PatchScheme& ps, double gamma) {
    check_scheme(t, ps);
    return sparse_code_columns(t.omega, extract_patches(x, ps), gamma);
}

CostReport evaluate_cost(const WeightedLeastSquares& data, const Vector& x, const Matrix& codes,
                         const SparsifyingTransform& t, const PatchScheme& ps, double beta, double gamma) {
    CostReport c;
    c.data_term = data.value(x);
    c.sparsification_residual = (t.omega * extract_patches(x, ps) - codes).squaredNorm();
    c.l0_count = static_cast<long>((codes.array() != 0.0).count());
    c.total = c.data_term + beta * (c.sparsification_residual + gamma * gamma * static_cast<double>(c.l0_count));
    return c;
}

void image_update(Vector& x, const WeightedLeastSquares& data, const TransformPenalty& penalty,
                  const PwlsStConfig& cfg, int outer_index, OsLalmTrace* trace) {
    os_lalm_solve(data, penalty, x, OsLalmSettings{cfg.inner_iters, cfg.alpha}, outer_index, trace);
}

PwlsStResult reconstruct_pwls_st(const WeightedLeastSquares& data, const SparsifyingTransform& t,
                                 const PatchScheme& ps, const PwlsStConfig& cfg, const Vector& x_init,
                                 const ImageMonitor& rmse) {
    cfg.validate();
    check_scheme(t, ps);
    if (data.n_subsets() != cfg.subsets) throw ConfigError("pwls-st: data term was built with a different subset count");
    if (x_init.size() != ps.n_pixels()) throw ConfigError("pwls-st: initial image does not match the patch scheme");

    PwlsStResult result;
    result.image = x_init.cwiseMax(0.0);
    result.codes = sparse_coding_step(result.image, t, ps, cfg.gamma);
    CostReport first = evaluate_cost(data, result.image, result.codes, t, ps, cfg.beta, cfg.gamma);
    if (rmse) first.rmse_hu = rmse(result.image);
    result.history.push_back(first);

    TransformPenalty penalty(t, ps, cfg.beta);
    const double l0_weight = cfg.gamma * cfg.gamma;
    for (int i = 0; i < cfg.outer_iters; ++i) {
        penalty.set_codes(result.codes);
        const Vector previous = result.image;
        image_update(result.image, data, penalty, cfg, i);

        // one projection and one patch transform serve both cost evaluations
        const double data_term = data.value(result.image);
        const Matrix coeffs = t.omega * extract_patches(result.image, ps);
        const auto old_l0 = static_cast<double>((result.codes.array() != 0.0).count());
        result.cost_after_image_update.push_back(
            data_term + cfg.beta * ((coeffs - result.codes).squaredNorm() + l0_weight * old_l0));

        result.codes = coeffs.unaryExpr([&](double b) { return hard_threshold(b, cfg.gamma); });
        CostReport c;
        c.outer_iter = i + 1;
        c.data_term = data_term;
        c.sparsification_residual = (coeffs - result.codes).squaredNorm();
        c.l0_count = static_cast<long>((result.codes.array() != 0.0).count());
        c.total = data_term + cfg.beta * (c.sparsification_residual + l0_weight * static_cast<double>(c.l0_count));
        const double norm = previous.norm();
        c.relative_change = (result.image - previous).norm() / (norm > 0.0 ? norm : 1.0);
        if (rmse) c.rmse_hu = rmse(result.image);
        result.history.push_back(c);
        if (cfg.stop_tol > 0.0 && c.relative_change < cfg.stop_tol) break;
    }
    return result;
}

}  // namespace ldct

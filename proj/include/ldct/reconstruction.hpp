#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "ldct/os_lalm.hpp"
#include "ldct/patches.hpp"
#include "ldct/transform.hpp"

namespace ldct {

struct PwlsStConfig {
    double beta = 1.0;
    double gamma = 25.0;
    int outer_iters = 50;  // I
    int inner_iters = 2;   // K
    int subsets = 4;       // M
    double alpha = 1.999;
    double stop_tol = 1e-6;  // relative image change; 0 disables early stopping

    void validate() const;
};

/// Penalised cost of one outer iterate.
struct CostReport {
    int outer_iter = 0;
    double data_term = 0.0;                // ½||y - Ax||²_W
    double sparsification_residual = 0.0;  // Σ_j ||ΩP_j x - z_j||²
    long l0_count = 0;                     // Σ_j ||z_j||_0
    double total = 0.0;                    // data + β(residual + γ² l0)
    double relative_change = 0.0;          // ||x_i - x_{i-1}|| / ||x_{i-1}||
    double rmse_hu = std::numeric_limits<double>::quiet_NaN();
};

/// β Σ_j ||ΩP_j x - z_j||² with the codes z held fixed.
class TransformPenalty : public SmoothPenalty {
public:
    TransformPenalty(const SparsifyingTransform& t, const PatchScheme& ps, double beta);

    void set_codes(const Matrix& codes);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Vector majorizer() const override { return majorizer_; }

private:
    const SparsifyingTransform* t_;
    PatchScheme ps_;
    double beta_;
    PatchGramOperator gram_;
    Vector code_back_;  // Σ_j P_j'Ω'z_j
    Matrix codes_;
    Vector majorizer_;
};

/// 2β Σ_j P_j'Ω'(ΩP_j x - z_j), computed by extract -> transform -> aggregate.
Vector regularizer_gradient(const Vector& x, const Matrix& codes, const SparsifyingTransform& t,
                            const PatchScheme& ps, double beta);

/// 2β l λ_max(Ω'Ω) for wrap-around stride-1 schemes.
double compute_majorizer_dr(const SparsifyingTransform& t, const PatchScheme& ps, double beta);
/// 2β λ_max(Ω'Ω) * overlap_diagonal(ps), valid for any scheme.
Vector majorizer_dr_diagonal(const SparsifyingTransform& t, const PatchScheme& ps, double beta);

/// z_j = H_γ(ΩP_j x), returned as an l x N matrix.
Matrix sparse_coding_step(const Vector& x, const SparsifyingTransform& t, const PatchScheme& ps, double gamma);

CostReport evaluate_cost(const WeightedLeastSquares& data, const Vector& x, const Matrix& codes,
                         const SparsifyingTransform& t, const PatchScheme& ps, double beta, double gamma);

/// Runs K passes of relaxed OS-LALM on the image with the codes in `penalty` fixed.
void image_update(Vector& x, const WeightedLeastSquares& data, const TransformPenalty& penalty,
                  const PwlsStConfig& cfg, int outer_index = 0, OsLalmTrace* trace = nullptr);

struct PwlsStResult {
    Vector image;
    Matrix codes;
    std::vector<CostReport> history;  // entry 0 is the initial point
    /// Cost after each image update, before the following sparse coding step.
    std::vector<double> cost_after_image_update;
};

using ImageMonitor = std::function<double(const Vector&)>;

/// Alternates image updates (K passes over M subsets) and hard-threshold sparse
/// coding for I outer iterations, starting from x_init.
PwlsStResult reconstruct_pwls_st(const WeightedLeastSquares& data, const SparsifyingTransform& t,
                                 const PatchScheme& ps, const PwlsStConfig& cfg, const Vector& x_init,
                                 const ImageMonitor& rmse = {});

}  // namespace ldct

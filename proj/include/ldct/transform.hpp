#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "ldct/patches.hpp"

namespace ldct {

struct SpectralStats {
    double lambda_max = 0.0;  // largest eigenvalue of Ω'Ω
    double condition = 0.0;   // σ_max / σ_min
};

/// Throws ValidationError when Ω is singular (infinite condition number).
SpectralStats spectral_stats(const Matrix& omega);

/// Square patch transform Ω with cached spectral data. Rows act on patches
/// vectorised column-major (see PatchScheme).
struct SparsifyingTransform {
    Matrix omega;
    int patch_rows = 0;
    int patch_cols = 0;
    SpectralStats stats;

    static SparsifyingTransform from_matrix(Matrix omega, int patch_rows, int patch_cols);
    int size() const { return static_cast<int>(omega.rows()); }
};

/// Kronecker product of orthonormal 1D DCT-II matrices, matched to column-major patches.
SparsifyingTransform make_dct_transform(int patch_rows, int patch_cols);

inline double hard_threshold(double b, double threshold) { return std::abs(b) < threshold ? 0.0 : b; }

/// Z = H_threshold(ΩY), column by column.
Matrix sparse_code_columns(const Matrix& omega, const Matrix& y, double threshold);

enum class TransformInit { dct, identity, random_orthonormal };

struct LearningConfig {
    double lambda0 = 1.0;  // λ = lambda0 * ||Y||_F^2
    double eta = 75.0;
    int n_iters = 100;
    TransformInit init = TransformInit::dct;
    std::uint64_t seed = 0;
    int patch_rows = 8;
    int patch_cols = 8;
    bool track_objective = true;

    void validate() const;
};

/// Objective values around one alternation of the learning loop.
struct LearningStep {
    int iteration = 0;
    double after_coding = 0.0;  // objective once Z = H_η(ΩY)
    double after_update = 0.0;  // objective once Ω is re-solved for that Z
    double residual_ratio = 0.0;  // ||ΩY - Z||_F^2 / ||Y||_F^2 at the end of the step
    long nonzeros = 0;
    double condition = 0.0;
};

struct LearningResult {
    SparsifyingTransform transform;
    double lambda = 0.0;
    double initial_objective = 0.0;
    std::vector<LearningStep> history;
};

/// ||ΩY - Z||_F^2 + λ(||Ω||_F^2 - log|det Ω|) + η^2 ||Z||_0
double learning_objective(const Matrix& omega, const Matrix& y, const Matrix& z, double lambda, double eta);

/// argmin_Ω ||ΩY - Z||_F^2 + λ(||Ω||_F^2 - log|det Ω|) in closed form.
Matrix transform_update(const Matrix& y, const Matrix& z, double lambda);

Matrix initial_transform(const LearningConfig& cfg);

/// Alternating minimisation: sparse code with H_η, then exact transform update.
/// n_iters == 0 returns the initial transform unchanged.
LearningResult learn_transform(const Matrix& y, const LearningConfig& cfg,
                               const std::function<void(const LearningStep&)>& on_step = {});

// Text header line "STFM <l> <patch_rows> <patch_cols> colmajor" followed by l*l
// little-endian float64 values in row-major order.
void write_transform(const std::filesystem::path& path, const SparsifyingTransform& t);
SparsifyingTransform read_transform(const std::filesystem::path& path);

}  // namespace ldct

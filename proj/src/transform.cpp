#include "ldct/transform.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ldct/rng.hpp"

namespace ldct {

SpectralStats spectral_stats(const Matrix& omega) {
    if (omega.rows() != omega.cols() || omega.rows() == 0) throw ValidationError("transform: Ω must be square");
    Eigen::JacobiSVD<Matrix> svd(omega);
    const auto& s = svd.singularValues();
    const double smax = s[0];
    const double smin = s[s.size() - 1];
    if (!(smin > 0.0) || !std::isfinite(smax / smin)) {
        throw ValidationError("transform: Ω is singular (condition number is infinite)");
    }
    return {smax * smax, smax / smin};
}

SparsifyingTransform SparsifyingTransform::from_matrix(Matrix omega, int patch_rows, int patch_cols) {
    if (omega.rows() != static_cast<Eigen::Index>(patch_rows) * patch_cols) {
        throw ValidationError("transform: Ω size does not match the patch dimensions");
    }
    if (!omega.allFinite()) throw ValidationError("transform: Ω has non-finite entries");
    SparsifyingTransform t;
    t.stats = spectral_stats(omega);
    t.omega = std::move(omega);
    t.patch_rows = patch_rows;
    t.patch_cols = patch_cols;
    return t;
}

namespace {

Matrix dct_matrix(int n) {
    Matrix d(n, n);
    for (int k = 0; k < n; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int i = 0; i < n; ++i) d(k, i) = scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
    return d;
}

}  // namespace

SparsifyingTransform make_dct_transform(int patch_rows, int patch_cols) {
    if (patch_rows < 1 || patch_cols < 1) throw ValidationError("transform: patch dimensions must be >= 1");
    const Matrix dr = dct_matrix(patch_rows), dc = dct_matrix(patch_cols);
    const int l = patch_rows * patch_cols;
    // vec(Dr X Dc') = (Dc ⊗ Dr) vec(X) for column-major vec
    Matrix omega(l, l);
    for (int i = 0; i < patch_cols; ++i) {
        for (int j = 0; j < patch_cols; ++j) omega.block(i * patch_rows, j * patch_rows, patch_rows, patch_rows) = dc(i, j) * dr;
    }
    SparsifyingTransform t;
    t.omega = std::move(omega);
    t.patch_rows = patch_rows;
    t.patch_cols = patch_cols;
    t.stats = {1.0, 1.0};
    return t;
}

Matrix sparse_code_columns(const Matrix& omega, const Matrix& y, double threshold) {
    if (omega.cols() != y.rows()) throw ConfigError("sparse coding: Ω and Y shapes disagree");
    if (!(threshold > 0.0)) throw ValidationError("sparse coding: threshold must be > 0");
    Matrix z = omega * y;
    z = z.unaryExpr([threshold](double b) { return hard_threshold(b, threshold); });
    return z;
}

void LearningConfig::validate() const {
    if (!(lambda0 > 0.0)) throw ValidationError("learning: lambda must be > 0");
    if (!(eta > 0.0)) throw ValidationError("learning: eta must be > 0");
    if (n_iters < 0) throw ValidationError("learning: iteration count must be >= 0");
    if (patch_rows < 1 || patch_cols < 1) throw ValidationError("learning: patch dimensions must be >= 1");
}

double learning_objective(const Matrix& omega, const Matrix& y, const Matrix& z, double lambda, double eta) {
    const double fit = (omega * y - z).squaredNorm();
    const double logdet = Eigen::PartialPivLU<Matrix>(omega).matrixLU().diagonal().array().abs().log().sum();
    const auto nnz = static_cast<double>((z.array() != 0.0).count());
    return fit + lambda * (omega.squaredNorm() - logdet) + eta * eta * nnz;
}

namespace {

class TransformSolver {
public:
    TransformSolver(const Matrix& y, double lambda) : lambda_(lambda) {
        const Eigen::Index l = y.rows();
        Matrix gram = y * y.transpose();
        gram.diagonal().array() += lambda;
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success) throw ValidationError("learning: YY' + λI is not positive definite");
        l_inv_ = llt_.matrixL().solve(Matrix::Identity(l, l));
    }

    Matrix update(const Matrix& y, const Matrix& z) const {
        const Matrix m = l_inv_ * (y * z.transpose());
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const Vector mid = 0.5 * (s.array() + (s.array().square() + 2.0 * lambda_).sqrt()).matrix();
        // m = Q Σ R'  ->  Ω = R diag(mid) Q' L^{-1}
        return svd.matrixV() * mid.asDiagonal() * svd.matrixU().transpose() * l_inv_;
    }

private:
    double lambda_;
    Eigen::LLT<Matrix> llt_;
    Matrix l_inv_;
};

}  // namespace

Matrix transform_update(const Matrix& y, const Matrix& z, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("learning: lambda must be > 0");
    if (y.rows() != z.rows() || y.cols() != z.cols()) throw ConfigError("learning: Y and Z shapes disagree");
    return TransformSolver(y, lambda).update(y, z);
}

Matrix initial_transform(const LearningConfig& cfg) {
    const int l = cfg.patch_rows * cfg.patch_cols;
    switch (cfg.init) {
        case TransformInit::dct:
            return make_dct_transform(cfg.patch_rows, cfg.patch_cols).omega;
        case TransformInit::identity:
            return Matrix::Identity(l, l);
        case TransformInit::random_orthonormal: {
            CounterRng rng(cfg.seed, 0x0e1a);
            Matrix g(l, l);
            for (int j = 0; j < l; ++j) {
                for (int i = 0; i < l; ++i) g(i, j) = rng.normal();
            }
            Eigen::HouseholderQR<Matrix> qr(g);
            return qr.householderQ() * Matrix::Identity(l, l);
        }
    }
    return Matrix::Identity(l, l);
}

LearningResult learn_transform(const Matrix& y, const LearningConfig& cfg,
                               const std::function<void(const LearningStep&)>& on_step) {
    cfg.validate();
    const int l = cfg.patch_rows * cfg.patch_cols;
    if (y.rows() != l) throw ValidationError("learning: training patches have the wrong length");
    if (y.cols() < l) throw ValidationError("learning: need at least l training patches");
    if (!y.allFinite()) throw ValidationError("learning: training patches contain non-finite values");

    const double y_energy = y.squaredNorm();
    LearningResult result;
    result.lambda = cfg.lambda0 * (y_energy > 0.0 ? y_energy : 1.0);
    Matrix omega = initial_transform(cfg);
    if (cfg.track_objective) result.initial_objective = learning_objective(omega, y, Matrix::Zero(l, y.cols()), result.lambda, cfg.eta);

    if (cfg.n_iters > 0) {
        const TransformSolver solver(y, result.lambda);
        for (int it = 0; it < cfg.n_iters; ++it) {
            LearningStep step;
            step.iteration = it + 1;
            const Matrix z = sparse_code_columns(omega, y, cfg.eta);
            if (cfg.track_objective) step.after_coding = learning_objective(omega, y, z, result.lambda, cfg.eta);
            omega = solver.update(y, z);
            if (!omega.allFinite()) throw DivergenceError("learning: transform update produced non-finite values", it, 0, 0);
            if (cfg.track_objective) {
                step.after_update = learning_objective(omega, y, z, result.lambda, cfg.eta);
                step.residual_ratio = (omega * y - z).squaredNorm() / (y_energy > 0.0 ? y_energy : 1.0);
            }
            step.nonzeros = static_cast<long>((z.array() != 0.0).count());
            step.condition = spectral_stats(omega).condition;
            result.history.push_back(step);
            if (on_step) on_step(step);
        }
    }
    result.transform = SparsifyingTransform::from_matrix(std::move(omega), cfg.patch_rows, cfg.patch_cols);
    return result;
}

void write_transform(const std::filesystem::path& path, const SparsifyingTransform& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "STFM " << t.size() << " " << t.patch_rows << " " << t.patch_cols << " colmajor\n";
    for (Eigen::Index i = 0; i < t.omega.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.omega.cols(); ++j) {
            const double v = t.omega(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

SparsifyingTransform read_transform(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, order;
    int l = 0, pr = 0, pc = 0;
    hs >> magic >> l >> pr >> pc >> order;
    if (magic != "STFM") throw IoError(path.string() + ": bad magic, expected STFM");
    if (order != "colmajor") throw IoError(path.string() + ": unsupported patch vector order '" + order + "'");
    if (l < 1 || pr < 1 || pc < 1 || l != pr * pc) throw IoError(path.string() + ": inconsistent transform header");
    Matrix omega(l, l);
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            omega(i, j) = v;
        }
    }
    if (!in) throw IoError(path.string() + ": truncated transform matrix");
    return SparsifyingTransform::from_matrix(std::move(omega), pr, pc);
}

}  // namespace ldct

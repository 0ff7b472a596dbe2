#include <Eigen/Dense>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "ldct/transform.hpp"
#include "oracles.hpp"

using namespace ldct;

namespace {

/// Objective of one column: ||b - z||² + t² ||z||_0, minimised over all supports.
double best_support_cost(const Vector& b, double threshold) {
    const long l = b.size();
    double best = std::numeric_limits<double>::infinity();
    for (long mask = 0; mask < (1L << l); ++mask) {
        double cost = 0.0;
        for (long i = 0; i < l; ++i) cost += (mask >> i) & 1 ? threshold * threshold : b[i] * b[i];
        best = std::min(best, cost);
    }
    return best;
}

double column_cost(const Vector& b, const Vector& z, double threshold) {
    return (b - z).squaredNorm() + threshold * threshold * static_cast<double>((z.array() != 0.0).count());
}

}  // namespace

TEST_CASE("hard threshold boundary") {
    CHECK(hard_threshold(74.999, 75.0) == 0.0);
    CHECK(hard_threshold(75.0, 75.0) == 75.0);
    CHECK(hard_threshold(-75.0, 75.0) == -75.0);
    const Matrix z = sparse_code_columns(Matrix::Identity(2, 2), (Matrix(2, 1) << 74.999, 75.0).finished(), 75.0);
    CHECK(z(0, 0) == 0.0);
    CHECK(z(1, 0) == 75.0);
    CHECK(sparse_code_columns(Matrix::Identity(3, 3), Matrix::Zero(3, 4), 1.0).isZero(0.0));
    CHECK_THROWS_AS(sparse_code_columns(Matrix::Identity(3, 3), Matrix::Zero(3, 4), 0.0), ValidationError);
}

TEST_CASE("hard thresholding is the exhaustive-support optimum") {
    std::mt19937_64 gen(21);
    const double t = 0.6;
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix omega = oracle::random_matrix(3, 3, gen);
        const Matrix y = oracle::random_matrix(3, 1, gen);
        const Vector b = omega * y;
        const Vector z = sparse_code_columns(omega, y, t).col(0);
        CHECK(column_cost(b, z, t) <= best_support_cost(b, t) + 1e-14);
    }
}

TEST_CASE("2D DCT transform") {
    CHECK(make_dct_transform(1, 1).omega(0, 0) == doctest::Approx(1.0));
    const auto t = make_dct_transform(8, 8);
    CHECK((t.omega.transpose() * t.omega - Matrix::Identity(64, 64)).norm() < 1e-12);
    CHECK((t.omega.row(0).array() - 1.0 / 8.0).abs().maxCoeff() < 1e-15);
    const auto s = spectral_stats(t.omega);
    CHECK(s.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.condition == doctest::Approx(1.0).epsilon(1e-12));
    // a vertical ramp patch (varies along rows only) has energy only in the row-frequency block
    const auto r = make_dct_transform(4, 2);
    Vector ramp(8);
    ramp << 0, 1, 2, 3, 0, 1, 2, 3;
    const Vector coeff = r.omega * ramp;
    for (int i = 4; i < 8; ++i) CHECK(std::abs(coeff[i]) < 1e-12);
    std::mt19937_64 gen(4);
    const Matrix y = oracle::random_matrix(64, 50, gen);
    CHECK(std::abs((t.omega * y).norm() - y.norm()) <= 1e-12 * y.norm());
}

TEST_CASE("spectral stats") {
    CHECK(spectral_stats(Matrix::Identity(5, 5)).condition == 1.0);
    const auto d = spectral_stats((Matrix(2, 2) << 2, 0, 0, 1).finished());
    CHECK(d.lambda_max == doctest::Approx(4.0));
    CHECK(d.condition == doctest::Approx(2.0));
    std::mt19937_64 gen(6);
    const Matrix m = oracle::random_matrix(8, 8, gen);
    const auto s = spectral_stats(m);
    const Eigen::BDCSVD<Matrix> svd(m);
    const Vector sv = svd.singularValues();
    CHECK(s.lambda_max == doctest::Approx(sv[0] * sv[0]).epsilon(1e-10));
    CHECK(s.condition == doctest::Approx(sv[0] / sv[7]).epsilon(1e-10));
    CHECK_THROWS_AS(spectral_stats((Matrix(2, 2) << 1, 2, 2, 4).finished()), ValidationError);
}

TEST_CASE("closed-form transform update beats a gradient-descent minimiser") {
    // With Z = 0 the subproblem is smooth: f(Ω) = ||ΩY||² + λ(||Ω||² - log|det Ω|).
    std::mt19937_64 gen(9);
    const Matrix y = oracle::random_matrix(4, 30, gen);
    const Matrix z = Matrix::Zero(4, 30);
    const double lambda = 0.5;
    auto f = [&](const Matrix& w) {
        return (w * y).squaredNorm() + lambda * (w.squaredNorm() - std::log(std::abs(w.determinant())));
    };
    const Matrix closed = transform_update(y, z, lambda);

    Matrix w = Matrix::Identity(4, 4);
    const Matrix yy = y * y.transpose();
    for (int it = 0; it < 20000; ++it) {
        const Matrix grad = 2.0 * w * yy + lambda * (2.0 * w - w.inverse().transpose());
        w -= 2e-3 * grad;
    }
    CHECK(f(closed) <= f(w) + 1e-9);
    CHECK(f(w) == doctest::Approx(f(closed)).epsilon(1e-8));
}

TEST_CASE("closed-form update is a local minimum under random perturbations") {
    std::mt19937_64 gen(10);
    const Matrix y = oracle::random_matrix(6, 40, gen);
    const Matrix omega0 = oracle::random_matrix(6, 6, gen);
    const Matrix z = sparse_code_columns(omega0, y, 0.3);
    const double lambda = 0.2;
    const Matrix w = transform_update(y, z, lambda);
    const double base = learning_objective(w, y, z, lambda, 0.3);
    for (int k = 0; k < 100; ++k) {
        const Matrix p = w + 1e-3 * oracle::random_matrix(6, 6, gen);
        CHECK(learning_objective(p, y, z, lambda, 0.3) >= base);
    }
}

TEST_CASE("learning on exactly sparse data") {
    // Y = Ω0^{-1} S with S sparse and nonzeros well above η, Ω0 = the DCT initialisation
    std::mt19937_64 gen(12);
    const int l = 16, n = 400;
    const double eta = 1.0;
    const Matrix omega0 = make_dct_transform(4, 4).omega;
    Matrix s = Matrix::Zero(l, n);
    std::uniform_int_distribution<int> pick(0, l - 1);
    std::uniform_real_distribution<double> mag(3.0, 10.0);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < 3; ++k) s(pick(gen), j) = (k % 2 ? -1.0 : 1.0) * mag(gen);
    }
    const Matrix y = omega0.transpose() * s;
    LearningConfig cfg;
    cfg.patch_rows = cfg.patch_cols = 4;
    cfg.eta = eta;
    cfg.lambda0 = 1e-6;
    cfg.n_iters = 20;
    const auto result = learn_transform(y, cfg);
    double prev = result.initial_objective;
    for (const auto& step : result.history) {
        CHECK(step.after_coding <= prev * (1.0 + 1e-12));
        CHECK(step.after_update <= step.after_coding * (1.0 + 1e-12));
        prev = step.after_update;
    }
    CHECK(result.history.back().residual_ratio < 1e-3);
    CHECK(std::isfinite(result.transform.stats.condition));
}

TEST_CASE("larger lambda improves conditioning") {
    std::mt19937_64 gen(13);
    const Matrix y = oracle::random_matrix(16, 16, gen) + 3.0 * Matrix::Identity(16, 16);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda0 : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        LearningConfig cfg;
        cfg.patch_rows = cfg.patch_cols = 4;
        cfg.eta = 0.5;
        cfg.lambda0 = lambda0;
        cfg.n_iters = 10;
        cfg.init = TransformInit::identity;
        const double cond = learn_transform(y, cfg).transform.stats.condition;
        CHECK(cond <= prev * (1.0 + 1e-9));
        prev = cond;
    }
    CHECK(prev < 1.1);

    // identity training data: Ω Ω' tends to a multiple of I as λ grows
    LearningConfig cfg;
    cfg.patch_rows = cfg.patch_cols = 4;
    cfg.eta = 0.1;
    cfg.lambda0 = 100.0;
    cfg.n_iters = 5;
    cfg.init = TransformInit::identity;
    CHECK(learn_transform(Matrix::Identity(16, 16), cfg).transform.stats.condition < 1.01);
}

TEST_CASE("learning argument validation and zero iterations") {
    LearningConfig cfg;
    cfg.patch_rows = cfg.patch_cols = 2;
    cfg.n_iters = 0;
    std::mt19937_64 gen(1);
    const Matrix y = oracle::random_matrix(4, 10, gen);
    const auto r = learn_transform(y, cfg);
    CHECK(r.transform.omega == make_dct_transform(2, 2).omega);
    CHECK(r.history.empty());
    CHECK_THROWS_AS(learn_transform(oracle::random_matrix(4, 3, gen), cfg), ValidationError);
    cfg.eta = -1.0;
    CHECK_THROWS_AS(learn_transform(y, cfg), ValidationError);
    cfg.eta = 1.0;
    cfg.lambda0 = 0.0;
    CHECK_THROWS_AS(learn_transform(y, cfg), ValidationError);
    cfg.lambda0 = 1.0;
    cfg.init = TransformInit::random_orthonormal;
    cfg.seed = 5;
    const Matrix q = initial_transform(cfg);
    CHECK((q.transpose() * q - Matrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("transform file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "ldct_stfm";
    std::filesystem::create_directories(dir);
    std::mt19937_64 gen(3);
    const auto t = SparsifyingTransform::from_matrix(oracle::random_matrix(6, 6, gen), 2, 3);
    write_transform(dir / "t.stfm", t);
    const auto back = read_transform(dir / "t.stfm");
    CHECK(back.omega == t.omega);
    CHECK(back.patch_rows == 2);
    CHECK(back.patch_cols == 3);
    const auto singular = SparsifyingTransform{Matrix::Zero(4, 4), 2, 2, {}};
    write_transform(dir / "s.stfm", singular);
    CHECK_THROWS_AS(read_transform(dir / "s.stfm"), ValidationError);
    std::filesystem::remove_all(dir);
}

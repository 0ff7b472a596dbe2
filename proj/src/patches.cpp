#include "ldct/patches.hpp"

#include <string>

namespace ldct {

namespace {

inline int wrap_index(int i, int n) {
    const int m = i % n;
    return m < 0 ? m + n : m;
}

void check_image(const Vector& x, const PatchScheme& ps) {
    if (x.size() != ps.n_pixels()) {
        throw ConfigError("patches: image has " + std::to_string(x.size()) + " pixels, scheme expects " +
                          std::to_string(ps.n_pixels()));
    }
}

}  // namespace

void PatchScheme::validate() const {
    if (patch_rows < 1 || patch_cols < 1) throw ConfigError("patches: patch dimensions must be >= 1");
    if (stride < 1) throw ConfigError("patches: stride must be >= 1");
    if (image_rows < 1 || image_cols < 1) throw ConfigError("patches: image dimensions must be >= 1");
    if (boundary == PatchBoundary::interior && (patch_rows > image_rows || patch_cols > image_cols)) {
        throw ConfigError("patches: interior patches larger than the image");
    }
}

int PatchScheme::origins_down() const {
    if (boundary == PatchBoundary::wrap) return (image_rows + stride - 1) / stride;
    return (image_rows - patch_rows) / stride + 1;
}

int PatchScheme::origins_across() const {
    if (boundary == PatchBoundary::wrap) return (image_cols + stride - 1) / stride;
    return (image_cols - patch_cols) / stride + 1;
}

Matrix extract_patches(const Vector& x, const PatchScheme& ps) {
    ps.validate();
    check_image(x, ps);
    const int l = ps.patch_size();
    const int nd = ps.origins_down(), na = ps.origins_across();
    Matrix out(l, static_cast<Eigen::Index>(nd) * na);
    for (int i = 0; i < nd; ++i) {
        for (int j = 0; j < na; ++j) {
            const int r0 = i * ps.stride, c0 = j * ps.stride;
            double* col = out.col(static_cast<Eigen::Index>(i) * na + j).data();
            for (int pc = 0; pc < ps.patch_cols; ++pc) {
                const int c = wrap_index(c0 + pc, ps.image_cols);
                for (int pr = 0; pr < ps.patch_rows; ++pr) {
                    const int r = wrap_index(r0 + pr, ps.image_rows);
                    col[pc * ps.patch_rows + pr] = x[static_cast<Eigen::Index>(r) * ps.image_cols + c];
                }
            }
        }
    }
    return out;
}

Vector aggregate_patches(const Matrix& coeffs, const PatchScheme& ps) {
    ps.validate();
    if (coeffs.rows() != ps.patch_size() || coeffs.cols() != ps.n_patches()) {
        throw ConfigError("patches: coefficient matrix must be l x N");
    }
    const int nd = ps.origins_down(), na = ps.origins_across();
    Vector out = Vector::Zero(ps.n_pixels());
    for (int i = 0; i < nd; ++i) {
        for (int j = 0; j < na; ++j) {
            const int r0 = i * ps.stride, c0 = j * ps.stride;
            const double* col = coeffs.col(static_cast<Eigen::Index>(i) * na + j).data();
            for (int pc = 0; pc < ps.patch_cols; ++pc) {
                const int c = wrap_index(c0 + pc, ps.image_cols);
                for (int pr = 0; pr < ps.patch_rows; ++pr) {
                    const int r = wrap_index(r0 + pr, ps.image_rows);
                    out[static_cast<Eigen::Index>(r) * ps.image_cols + c] += col[pc * ps.patch_rows + pr];
                }
            }
        }
    }
    return out;
}

Vector overlap_diagonal(const PatchScheme& ps) {
    return aggregate_patches(Matrix::Ones(ps.patch_size(), ps.n_patches()), ps);
}

PatchGramOperator::PatchGramOperator(const Matrix& gram, PatchScheme ps) : gram_(gram), ps_(ps) {
    ps_.validate();
    const int l = ps_.patch_size();
    if (gram_.rows() != l || gram_.cols() != l) throw ConfigError("patches: Gram matrix must be l x l");
    if (!ps_.uniform_overlap()) return;

    const int kr = 2 * ps_.patch_rows - 1, kc = 2 * ps_.patch_cols - 1;
    Matrix kernel = Matrix::Zero(kr, kc);
    for (int a = 0; a < l; ++a) {
        const int ar = a % ps_.patch_rows, ac = a / ps_.patch_rows;
        for (int b = 0; b < l; ++b) {
            const int br = b % ps_.patch_rows, bc = b / ps_.patch_rows;
            kernel(br - ar + ps_.patch_rows - 1, bc - ac + ps_.patch_cols - 1) += gram_(a, b);
        }
    }
    for (int i = 0; i < kr; ++i) {
        for (int j = 0; j < kc; ++j) {
            if (kernel(i, j) != 0.0) taps_.push_back({i - (ps_.patch_rows - 1), j - (ps_.patch_cols - 1), kernel(i, j)});
        }
    }
}

Vector PatchGramOperator::apply(const Vector& x) const {
    check_image(x, ps_);
    if (!ps_.uniform_overlap()) return aggregate_patches(gram_ * extract_patches(x, ps_), ps_);

    const int rows = ps_.image_rows, cols = ps_.image_cols;
    Vector out = Vector::Zero(x.size());
    for (const Tap& t : taps_) {
        const int shift = wrap_index(t.dc, cols);
        for (int r = 0; r < rows; ++r) {
            const double* src = x.data() + static_cast<Eigen::Index>(wrap_index(r + t.dr, rows)) * cols;
            double* dst = out.data() + static_cast<Eigen::Index>(r) * cols;
            const int split = cols - shift;
            for (int c = 0; c < split; ++c) dst[c] += t.weight * src[c + shift];
            for (int c = split; c < cols; ++c) dst[c] += t.weight * src[c + shift - cols];
        }
    }
    return out;
}

}  // namespace ldct

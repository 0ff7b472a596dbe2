#pragma once

#include <Eigen/Core>

#include "ldct/image.hpp"

namespace ldct {

using Matrix = Eigen::MatrixXd;

enum class PatchBoundary { wrap, interior };

/// Defines the patch extractors P_j.
///
/// Patch origins visit the grid in row-major order with the given stride. Within a
/// patch, pixels are vectorised column-major: element a = pc * patch_rows + pr.
/// `wrap` indexes modulo the image size, so every origin yields a full patch.
struct PatchScheme {
    int patch_rows = 8;
    int patch_cols = 8;
    int stride = 1;
    PatchBoundary boundary = PatchBoundary::wrap;
    int image_rows = 0;
    int image_cols = 0;

    void validate() const;
    int patch_size() const { return patch_rows * patch_cols; }
    int origins_down() const;
    int origins_across() const;
    long n_patches() const { return static_cast<long>(origins_down()) * origins_across(); }
    long n_pixels() const { return static_cast<long>(image_rows) * image_cols; }
    /// Wrap-around with stride 1: every pixel is covered by exactly l patches.
    bool uniform_overlap() const { return boundary == PatchBoundary::wrap && stride == 1; }
};

/// l x N matrix whose column j is P_j x.
Matrix extract_patches(const Vector& x, const PatchScheme& ps);
/// sum_j P_j' c_j, the adjoint of extract_patches.
Vector aggregate_patches(const Matrix& coeffs, const PatchScheme& ps);
/// Diagonal of sum_j P_j' P_j (number of patches covering each pixel).
Vector overlap_diagonal(const PatchScheme& ps);

/// x -> sum_j P_j' G P_j x for a fixed l x l matrix G.
///
/// For wrap-around stride-1 schemes the sum is shift invariant and is applied as a
/// circular correlation with a (2*patch_rows-1) x (2*patch_cols-1) kernel; other
/// schemes fall back to extract / multiply / aggregate.
class PatchGramOperator {
public:
    PatchGramOperator(const Matrix& gram, PatchScheme ps);

    Vector apply(const Vector& x) const;
    const PatchScheme& scheme() const { return ps_; }

private:
    struct Tap {
        int dr, dc;
        double weight;
    };

    Matrix gram_;
    PatchScheme ps_;
    std::vector<Tap> taps_;
};

}  // namespace ldct

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ldct/geometry.hpp"
#include "ldct/image.hpp"

namespace ldct {

/// Exact ray/pixel intersection lengths along a segment (Siddon traversal).
/// Calls `emit(pixel_index, length_mm)` once per pixel crossed, in traversal order.
/// A ray running exactly along a grid line is attributed to a single pixel.
template <class Emit>
void trace_ray(const Geometry& geo, const Ray& ray, Emit&& emit) {
    const double d = geo.pixel_size;
    const double x_min = geo.offset_x - 0.5 * geo.image_cols * d;
    const double y_min = geo.offset_y - 0.5 * geo.image_rows * d;
    const double x_max = x_min + geo.image_cols * d;
    const double y_max = y_min + geo.image_rows * d;
    const double dx = ray.x1 - ray.x0;
    const double dy = ray.y1 - ray.y0;
    const double length = std::hypot(dx, dy);
    if (length == 0.0) return;

    constexpr double inf = std::numeric_limits<double>::infinity();
    double a_lo = 0.0, a_hi = 1.0;
    auto clip = [&](double p0, double dp, double lo, double hi) {
        if (dp == 0.0) {
            if (p0 < lo || p0 > hi) a_hi = -inf;
            return;
        }
        double a0 = (lo - p0) / dp, a1 = (hi - p0) / dp;
        if (a0 > a1) std::swap(a0, a1);
        a_lo = std::max(a_lo, a0);
        a_hi = std::min(a_hi, a1);
    };
    clip(ray.x0, dx, x_min, x_max);
    clip(ray.y0, dy, y_min, y_max);
    if (!(a_hi > a_lo)) return;

    // next plane crossings are recomputed from integer plane indices to avoid drift
    const int step_x = dx > 0 ? 1 : -1;
    const int step_y = dy > 0 ? 1 : -1;
    auto first_plane = [](double p, double pmin, double dd, int step) {
        const double u = (p - pmin) / dd;
        return step > 0 ? static_cast<long>(std::floor(u)) + 1 : static_cast<long>(std::ceil(u)) - 1;
    };
    long ix = dx != 0.0 ? first_plane(ray.x0 + a_lo * dx, x_min, d, step_x) : 0;
    long iy = dy != 0.0 ? first_plane(ray.y0 + a_lo * dy, y_min, d, step_y) : 0;
    auto alpha_x = [&](long i) { return dx != 0.0 ? (x_min + i * d - ray.x0) / dx : inf; };
    auto alpha_y = [&](long i) { return dy != 0.0 ? (y_min + i * d - ray.y0) / dy : inf; };

    double a = a_lo;
    double ax = alpha_x(ix);
    double ay = alpha_y(iy);
    while (a < a_hi) {
        const double a_next = std::min({ax, ay, a_hi});
        if (a_next > a) {
            const double mid = 0.5 * (a + a_next);
            long c = static_cast<long>(std::floor((ray.x0 + mid * dx - x_min) / d));
            long r = static_cast<long>(std::floor((ray.y0 + mid * dy - y_min) / d));
            c = std::clamp<long>(c, 0, geo.image_cols - 1);
            r = std::clamp<long>(r, 0, geo.image_rows - 1);
            emit(r * geo.image_cols + c, (a_next - a) * length);
        }
        if (ax <= a_next) ax = alpha_x(ix += step_x);
        if (ay <= a_next) ay = alpha_y(iy += step_y);
        a = a_next;
    }
}

/// System operator A (and its exact adjoint) for one geometry.
///
/// `value_scale` multiplies every matrix entry, so an image stored in other units
/// (e.g. HU) maps to line integrals directly. With `cache` the sparse matrix is
/// assembled once; otherwise rays are traced on every call.
class Projector {
public:
    explicit Projector(Geometry geo, double value_scale = 1.0, bool cache = true);

    const Geometry& geometry() const { return geo_; }
    double value_scale() const { return scale_; }
    bool cached() const { return !row_ptr_.empty(); }

    Vector forward(const Vector& image) const;
    /// Rows of the listed views, concatenated in list order.
    Vector forward(const Vector& image, std::span<const int> views) const;
    Vector back(const Vector& sino) const;
    Vector back(const Vector& sino, std::span<const int> views) const;

    /// Calls emit(pixel, value) for the non-zeros of row `view * n_channels + channel`.
    template <class Emit>
    void for_each_in_row(int view, int channel, Emit&& emit) const {
        if (cached()) {
            const long row = static_cast<long>(view) * geo_.n_channels + channel;
            for (std::int64_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) emit(col_[k], val_[k]);
            return;
        }
        trace_ray(geo_, geo_.ray(view, channel), [&](long pixel, double len) { emit(pixel, scale_ * len); });
    }

private:
    void check_image(const Vector& image) const;

    Geometry geo_;
    double scale_;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> col_;
    std::vector<double> val_;
    std::vector<int> all_views_;
};

Vector forward_project(const Image& img, const Geometry& geo);
Image back_project(const Vector& sino, const Geometry& geo);

/// diag{A' W A 1}: a separable quadratic majorizer of A' W A.
Vector compute_majorizer_da(const Projector& proj, const Vector& weights);

}  // namespace ldct

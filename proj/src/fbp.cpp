#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ldct/baselines.hpp"

namespace ldct {

namespace {

constexpr double pi = std::numbers::pi;

/// Owns a pair of FFTW plans for real convolution of length-n rows.
class RampFilter {
public:
    RampFilter(int n, double spacing, bool fan, double cutoff) : n_(n), spacing_(spacing) {
        size_ = 1;
        while (size_ < 2 * n) size_ *= 2;
        real_ = fftw_alloc_real(size_);
        spec_ = fftw_alloc_complex(size_ / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(size_, real_, spec_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(size_, spec_, real_, FFTW_ESTIMATE);

        // band-limited ramp sampled at the detector spacing, with the equiangular
        // (γ / sin γ)^2 / 2 modulation for fan data
        std::fill(real_, real_ + size_, 0.0);
        for (int k = -(n - 1); k <= n - 1; ++k) {
            double h = 0.0;
            if (k == 0) {
                h = 1.0 / (4.0 * spacing * spacing);
            } else if (k % 2 != 0) {
                h = -1.0 / (k * k * pi * pi * spacing * spacing);
            }
            if (fan) {
                const double g = k * spacing;
                const double ratio = k == 0 ? 1.0 : g / std::sin(g);
                h *= 0.5 * ratio * ratio;
            }
            real_[k >= 0 ? k : size_ + k] = h;
        }
        fftw_execute(fwd_);
        response_.resize(size_ / 2 + 1);
        const double fc = 0.5 * cutoff;
        for (int k = 0; k <= size_ / 2; ++k) {
            const double f = static_cast<double>(k) / size_;
            const double window = f <= fc ? 0.5 * (1.0 + std::cos(pi * f / fc)) : 0.0;
            // kernel spectrum is real up to rounding; keep the real part for symmetry
            response_[k] = spec_[k][0] * window;
        }
    }

    ~RampFilter() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    RampFilter(const RampFilter&) = delete;
    RampFilter& operator=(const RampFilter&) = delete;

    void apply(const double* in, double* out) {
        std::fill(real_, real_ + size_, 0.0);
        std::copy(in, in + n_, real_);
        fftw_execute(fwd_);
        for (int k = 0; k <= size_ / 2; ++k) {
            spec_[k][0] *= response_[k];
            spec_[k][1] *= response_[k];
        }
        fftw_execute(inv_);
        const double scale = spacing_ / size_;
        for (int i = 0; i < n_; ++i) out[i] = real_[i] * scale;
    }

private:
    int n_;
    int size_;
    double spacing_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_;
    fftw_plan inv_;
    std::vector<double> response_;
};

double interpolate(const double* row, int n, double u) {
    if (u < 0.0 || u > n - 1) return 0.0;
    const int i = std::min(static_cast<int>(u), n - 2 < 0 ? 0 : n - 2);
    if (n == 1) return row[0];
    const double t = u - i;
    return (1.0 - t) * row[i] + t * row[i + 1];
}

}  // namespace

Image fbp_reconstruct(const Vector& sino, const Geometry& geo, const FbpConfig& cfg) {
    geo.validate();
    if (sino.size() != geo.n_rays()) throw ConfigError("fbp: sinogram length does not match the geometry");
    if (!sino.allFinite()) throw ValidationError("fbp: sinogram contains non-finite values");
    if (!(cfg.cutoff > 0.0 && cfg.cutoff <= 1.0)) throw ValidationError("fbp: cutoff must lie in (0, 1]");
    const bool fan = geo.mode == ScanMode::fan_arc;
    if (fan && std::abs(geo.angular_range - 2.0 * pi) > 1e-9) {
        throw ValidationError("fbp: fan-beam reconstruction requires a full 360 degree scan");
    }

    const int nc = geo.n_channels;
    const double spacing = fan ? geo.detector_spacing / geo.source_to_detector : geo.detector_spacing;
    RampFilter filter(nc, spacing, fan, cfg.cutoff);

    std::vector<double> weighted(nc), filtered(static_cast<std::size_t>(geo.n_views) * nc);
    for (int v = 0; v < geo.n_views; ++v) {
        for (int c = 0; c < nc; ++c) {
            const double s = sino[static_cast<Eigen::Index>(v) * nc + c];
            weighted[c] = fan ? s * geo.source_to_iso * std::cos(geo.channel_position(c)) : s;
        }
        filter.apply(weighted.data(), filtered.data() + static_cast<std::size_t>(v) * nc);
    }

    Image out(geo.image_rows, geo.image_cols, geo.pixel_size);
    const double d_angle = geo.angular_range / geo.n_views;
    const double view_weight = fan ? d_angle : d_angle * pi / geo.angular_range;
    const double centre = 0.5 * (nc - 1) - geo.channel_offset;
    for (int v = 0; v < geo.n_views; ++v) {
        const double theta = geo.view_angle(v);
        const double ct = std::cos(theta), st = std::sin(theta);
        const double* row = filtered.data() + static_cast<std::size_t>(v) * nc;
        for (int r = 0; r < geo.image_rows; ++r) {
            const double y = geo.offset_y + (r - 0.5 * (geo.image_rows - 1)) * geo.pixel_size;
            for (int c = 0; c < geo.image_cols; ++c) {
                const double x = geo.offset_x + (c - 0.5 * (geo.image_cols - 1)) * geo.pixel_size;
                if (!fan) {
                    const double u = (x * ct + y * st) / spacing + centre;
                    out(r, c) += view_weight * interpolate(row, nc, u);
                    continue;
                }
                const double vx = x - geo.source_to_iso * ct;
                const double vy = y - geo.source_to_iso * st;
                // central ray direction is (-ct, -st)
                const double gamma = std::atan2(-ct * vy + st * vx, -ct * vx - st * vy);
                const double u = gamma / spacing + centre;
                out(r, c) += view_weight * interpolate(row, nc, u) / (vx * vx + vy * vy);
            }
        }
    }
    return out;
}

}  // namespace ldct

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ldct/geometry.hpp"
#include "ldct/image.hpp"

namespace ldct {

/// Ellipse in image coordinates (mm); `value` is added inside (mm^-1).
struct Ellipse {
    double center_x = 0.0;
    double center_y = 0.0;
    double semi_axis_x = 1.0;
    double semi_axis_y = 1.0;
    double angle = 0.0;  // radians, counter-clockwise
    double value = 0.0;
    double edge_width = 0.0;  // mm; > 0 blends the boundary with a raised-cosine ramp

    bool contains(double x, double y) const;
    /// Fraction of `value` present at (x, y): the indicator, or the smoothed profile.
    double coverage(double x, double y) const;
};

/// Isotropic Gaussian bump: value * exp(-r² / (2 sigma²)), in mm^-1. Evaluated within 4 sigma.
struct Blob {
    double center_x = 0.0;
    double center_y = 0.0;
    double sigma = 1.0;
    double value = 0.0;
};

struct Phantom {
    std::string kind;  // "ellipses" or "raster"
    Image attenuation;  // mm^-1, fine grid
    HuScale hu;
};

/// Evaluates the summed ellipse indicator at every pixel centre of a rows x cols grid.
Phantom make_phantom(const std::vector<Ellipse>& ellipses, int rows, int cols, double pixel_size,
                     HuScale hu = {});
Phantom make_phantom(const std::vector<Ellipse>& ellipses, const std::vector<Blob>& blobs, int rows, int cols,
                     double pixel_size, HuScale hu = {});
Phantom make_phantom(const std::filesystem::path& raster, HuScale hu = {});

/// Head-like ellipse set (skull, brain, ventricles, low-contrast lesions) fitting in `radius` mm.
/// Brain tissue sits at the water value.
std::vector<Ellipse> shepp_logan_ellipses(double radius, HuScale hu = {}, double edge_width = 0.0);
/// Soft-tissue texture: `count` blobs of ±(0.25..1) * amplitude_hu spread over the brain.
std::vector<Blob> texture_blobs(double radius, std::uint64_t seed, int count, double amplitude_hu, HuScale hu = {});
/// Same anatomy class with randomised lesion layout; used for training slices.
std::vector<Ellipse> random_head_ellipses(double radius, std::uint64_t seed, HuScale hu = {},
                                          double edge_width = 0.0);

struct NoisySinogram {
    int n_views = 0;
    int n_channels = 0;
    Vector y;        // post-log line integrals
    Vector counts;   // photon counts (expected counts when noiseless)
    Vector weights;  // statistical weights, ~ 1 / var(y)
    double i0 = 0.0;
    std::uint64_t seed = 0;
};

/// Poisson transmission model on the fine grid. Zero counts are clamped to 1.
NoisySinogram simulate_sinogram(const Phantom& phantom, const Geometry& geo_fine, double i0,
                                std::uint64_t seed, bool noiseless = false);

/// Block-mean downsampling by an integer factor.
Image downsample(const Image& fine, int factor);

}  // namespace ldct

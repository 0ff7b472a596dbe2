#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ldct/config.hpp"

namespace ldct {

enum class ScanMode { parallel, fan_arc };

/// A ray as a finite segment in image coordinates (mm).
struct Ray {
    double x0, y0;
    double x1, y1;
};

/// 2D acquisition description together with the reconstruction grid it acts on.
///
/// Image coordinates: pixel (r, c) is centred at
///   x = offset_x + (c - (cols - 1) / 2) * pixel_size
///   y = offset_y + (r - (rows - 1) / 2) * pixel_size.
/// Sinogram samples are stored view-major: index = view * n_channels + channel.
///
/// Parallel mode: detector coordinate t = (channel - (n-1)/2 + channel_offset) * spacing,
/// ray direction (-sin θ, cos θ) through the point t * (cos θ, sin θ).
/// Fan mode: equiangular arc detector centred on the source. The source sits at
/// source_to_iso * (cos θ, sin θ); channel fan angle γ = (channel - (n-1)/2 + channel_offset)
/// * spacing / source_to_detector, measured counter-clockwise from the central ray.
struct Geometry {
    ScanMode mode = ScanMode::parallel;
    int n_channels = 1;
    int n_views = 1;
    double detector_spacing = 1.0;  // mm (arc length on the detector for fan mode)
    double source_to_iso = 0.0;     // mm, fan only
    double source_to_detector = 0.0;
    double angular_range = 3.14159265358979323846;  // radians
    double start_angle = 0.0;                       // radians
    double channel_offset = 0.0;                    // in channels
    int image_rows = 1;
    int image_cols = 1;
    double pixel_size = 1.0;  // mm
    double offset_x = 0.0;
    double offset_y = 0.0;

    void validate() const;

    long n_rays() const { return static_cast<long>(n_channels) * n_views; }
    long n_pixels() const { return static_cast<long>(image_rows) * image_cols; }

    double view_angle(int view) const { return start_angle + view * angular_range / n_views; }
    /// Fan angle of a channel (fan mode) or detector coordinate in mm (parallel mode).
    double channel_position(int channel) const;
    Ray ray(int view, int channel) const;

    /// Same scan over a grid `factor` times finer (same field of view).
    Geometry refined(int factor) const;

    /// Key-value text: angles in degrees, lengths in mm.
    static Geometry from_config(const KeyValueConfig& cfg);
    static Geometry load(const std::filesystem::path& path);
    std::string to_config() const;
};

/// Interleaved partition of the views into ordered subsets.
struct SubsetPartition {
    std::vector<std::vector<int>> views;  // views[m] = {m, m+M, m+2M, ...}
    std::vector<int> order;               // processing order (bit-reversed subset ids)

    int size() const { return static_cast<int>(views.size()); }
};

SubsetPartition partition_subsets(const Geometry& geo, int n_subsets);

/// Bit-reversal permutation of 0..n-1 (values >= n skipped for non powers of two).
std::vector<int> bit_reversal_order(int n);

}  // namespace ldct

#pragma once

#include <cstdint>
#include <vector>

#include "ldct/baselines.hpp"
#include "ldct/geometry.hpp"
#include "ldct/image.hpp"
#include "ldct/patches.hpp"
#include "ldct/simulation.hpp"

namespace ldct {

/// Desk-scale stand-in for a clinical fan-beam scanner: 500 mm field of view on an
/// n x n grid, equiangular arc detector, full 360 degree scan.
struct DeskProtocol {
    Geometry geometry;
    int refine = 2;            // simulation grid is this many times finer
    double head_radius = 200.0;  // mm
    double edge_width = 0.0;   // mm, phantom boundary ramp
    int texture_count = 0;     // soft-tissue texture blobs
    double texture_hu = 0.0;   // peak blob amplitude
    HuScale hu;

    Geometry simulation_geometry() const { return geometry.refined(refine); }
};

DeskProtocol desk_protocol(int image_size = 256, int n_views = 360);

/// Head phantom on the fine simulation grid.
Phantom desk_phantom(const DeskProtocol& p);
/// Training slices: random head layouts, distinct from the test phantom, on the fine grid.
Phantom desk_training_phantom(const DeskProtocol& p, std::uint64_t seed);

/// Fine-grid phantom averaged down to the reconstruction grid, in HU.
Image ground_truth_hu(const Phantom& ph, int refine);

/// Patch matrix (l x N) from several HU images. Every `keep_every`-th patch is kept.
Matrix collect_patches(const std::vector<Image>& images, int patch_rows, int patch_cols, int keep_every = 1);

/// FBP of post-log data, returned in HU.
Image fbp_hu(const Vector& y, const Geometry& geo, const HuScale& hu, const FbpConfig& cfg = {});

}  // namespace ldct

#include "ldct/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldct/evaluation.hpp"

namespace ldct {

DeskProtocol desk_protocol(int image_size, int n_views) {
    if (image_size < 8) throw ConfigError("desk protocol: image size must be >= 8");
    if (n_views < 1) throw ConfigError("desk protocol: need at least one view");
    DeskProtocol p;
    Geometry& g = p.geometry;
    g.mode = ScanMode::fan_arc;
    g.image_rows = g.image_cols = image_size;
    g.pixel_size = 500.0 / image_size;
    g.n_views = n_views;
    g.angular_range = 2.0 * std::numbers::pi;
    g.source_to_iso = 541.0;
    g.source_to_detector = 949.0;
    // 444 channels at 256 pixels keeps ~1.7 detector samples per pixel at isocentre
    g.n_channels = static_cast<int>(std::lround(444.0 * image_size / 256.0));
    g.detector_spacing = 2.0478 * 256.0 / image_size;
    g.channel_offset = 0.25;
    p.edge_width = std::max(8.0, 2.0 * g.pixel_size);
    p.texture_count = 6000;
    p.texture_hu = 30.0;
    g.validate();
    return p;
}

Phantom desk_phantom(const DeskProtocol& p) {
    const Geometry fine = p.simulation_geometry();
    return make_phantom(shepp_logan_ellipses(p.head_radius, p.hu, p.edge_width),
                        texture_blobs(p.head_radius, 1, p.texture_count, p.texture_hu, p.hu), fine.image_rows,
                        fine.image_cols, fine.pixel_size, p.hu);
}

Phantom desk_training_phantom(const DeskProtocol& p, std::uint64_t seed) {
    const Geometry fine = p.simulation_geometry();
    return make_phantom(random_head_ellipses(p.head_radius, seed, p.hu, p.edge_width),
                        texture_blobs(p.head_radius, seed + 7919, p.texture_count, p.texture_hu, p.hu),
                        fine.image_rows, fine.image_cols, fine.pixel_size, p.hu);
}

Image ground_truth_hu(const Phantom& ph, int refine) { return to_hu(downsample(ph.attenuation, refine), ph.hu); }

Matrix collect_patches(const std::vector<Image>& images, int patch_rows, int patch_cols, int keep_every) {
    if (images.empty()) throw ConfigError("training: no images");
    if (keep_every < 1) throw ConfigError("training: patch subsampling must be >= 1");
    std::vector<Matrix> blocks;
    long total = 0;
    for (const auto& img : images) {
        PatchScheme ps{patch_rows, patch_cols, 1, PatchBoundary::interior, img.rows, img.cols};
        const Matrix all = extract_patches(img.values, ps);
        const long kept = (all.cols() + keep_every - 1) / keep_every;
        Matrix sub(all.rows(), kept);
        for (long j = 0; j < kept; ++j) sub.col(j) = all.col(j * keep_every);
        total += kept;
        blocks.push_back(std::move(sub));
    }
    Matrix out(static_cast<long>(patch_rows) * patch_cols, total);
    long offset = 0;
    for (const auto& b : blocks) {
        out.middleCols(offset, b.cols()) = b;
        offset += b.cols();
    }
    return out;
}

Image fbp_hu(const Vector& y, const Geometry& geo, const HuScale& hu, const FbpConfig& cfg) {
    return to_hu(fbp_reconstruct(y, geo, cfg), hu);
}

}  // namespace ldct

#pragma once

#include "ldct/geometry.hpp"
#include "ldct/image.hpp"
#include "ldct/os_lalm.hpp"
#include "ldct/reconstruction.hpp"

namespace ldct {

struct FbpConfig {
    double cutoff = 1.0;  // Hanning cutoff as a fraction of the detector Nyquist frequency
};

/// Ramp-filtered back projection apodised by a Hanning window. Parallel beam
/// works for any angular range (weighted by π / range); fan beam needs a full
/// 360° scan (equiangular arc weighting). Output is in the sinogram's inverse
/// length units (mm^-1 for line integrals).
Image fbp_reconstruct(const Vector& sino, const Geometry& geo, const FbpConfig& cfg = {});

struct EpPotential {
    double value;
    double derivative;
};

/// Hyperbola φ(t) = δ²(sqrt(1 + (t/δ)²) - 1) and φ'(t) = t / sqrt(1 + (t/δ)²).
EpPotential ep_potential(double t, double delta);

struct EpConfig {
    double beta = 1.0;
    double delta = 10.0;  // in image units (HU in the pipeline)
    int neighborhood = 8;  // 4: axial pairs, 8: axial + diagonal (1/√2 weight)
    int subsets = 12;
    int iterations = 30;
    double alpha = 1.999;

    void validate() const;
};

/// β Σ_{pairs j~k} w_jk φ(x_j - x_k) over first-order neighbour differences,
/// majorised by the diagonal 2β Σ_k w_jk (φ'' <= 1).
class EdgePreservingPenalty : public SmoothPenalty {
public:
    EdgePreservingPenalty(int rows, int cols, const EpConfig& cfg);

    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Vector majorizer() const override { return majorizer_; }

private:
    struct Offset {
        int dr, dc;
        double weight;
    };
    template <class Visit>
    void for_each_pair(Visit&& visit) const;

    int rows_, cols_;
    double beta_, delta_;
    std::vector<Offset> offsets_;
    Vector majorizer_;
};

/// Relaxed OS-LALM on ½||y - Ax||²_W + EP penalty, run for cfg.iterations passes.
Vector reconstruct_pwls_ep(const WeightedLeastSquares& data, const EpConfig& cfg, const Vector& x_init);

/// PWLS-ST with the fixed orthonormal 2D DCT as the transform.
PwlsStResult reconstruct_pwls_dct(const WeightedLeastSquares& data, const PatchScheme& ps, const PwlsStConfig& cfg,
                                  const Vector& x_init, const ImageMonitor& rmse = {});

}  // namespace ldct

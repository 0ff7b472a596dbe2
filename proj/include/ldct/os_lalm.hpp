#pragma once

#include <vector>

#include "ldct/geometry.hpp"
#include "ldct/image.hpp"
#include "ldct/projector.hpp"

namespace ldct {

/// AL penalty schedule: 1 at n = 0, otherwise
/// π/(α(n+1)) * sqrt(1 - (π/(2α(n+1)))^2).
double rho_schedule(int n, double alpha);

/// Weighted least-squares data term ½||y - Ax||²_W split into ordered subsets.
class WeightedLeastSquares {
public:
    WeightedLeastSquares(const Projector& proj, Vector y, Vector weights, int n_subsets);

    const Projector& projector() const { return *proj_; }
    const SubsetPartition& subsets() const { return subsets_; }
    int n_subsets() const { return subsets_.size(); }
    const Vector& y() const { return y_; }
    const Vector& weights() const { return w_; }

    /// D_A = diag{A'WA1} with entries below 1e-12 * max clamped up to that floor.
    const Vector& majorizer() const { return da_; }

    double value(const Vector& x) const;
    /// A'W(Ax - y)
    Vector gradient(const Vector& x) const;
    /// M A_m'W_m(A_m x - y_m)
    Vector subset_gradient(const Vector& x, int subset) const;

private:
    const Projector* proj_;
    Vector y_;
    Vector w_;
    SubsetPartition subsets_;
    std::vector<Vector> y_sub_;
    std::vector<Vector> w_sub_;
    Vector da_;
};

/// Smooth regulariser seen by the image update: gradient and a diagonal majorizer
/// of its Hessian.
class SmoothPenalty {
public:
    virtual ~SmoothPenalty() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual Vector majorizer() const = 0;
};

struct OsLalmSettings {
    int iterations = 2;  // passes over all subsets
    double alpha = 1.999;
};

/// Per-step record of the solver, for inspection in tests.
struct OsLalmTrace {
    std::vector<int> n;  // schedule index kM + m after each subset update
    std::vector<double> rho_used;
};

/// Relaxed OS-LALM for min_{x >= 0} ½||y - Ax||²_W + R(x), starting from x (updated in place).
/// ρ starts at 1 and after the update with index n = kM + m is set to rho_schedule(n, α).
/// Subsets are visited in bit-reversed order; the initial gradient uses the last of them.
void os_lalm_solve(const WeightedLeastSquares& data, const SmoothPenalty& penalty, Vector& x,
                   const OsLalmSettings& settings, int outer_index = 0, OsLalmTrace* trace = nullptr);

}  // namespace ldct

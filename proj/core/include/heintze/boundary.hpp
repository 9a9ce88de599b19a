#pragma once

#include "heintze/linalg.hpp"
#include "heintze/spectral.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace heintze {

struct SolverConfig {
    double scan_step = 1e-2;
    double t_tol = 1e-12;
    /// The growth constant C_A is sampled over t in [-50*bracket_margin, 0].
    double bracket_margin = 5.0;
    /// Multiplier applied to the sampled C_A.
    double safety_factor = 2.0;
    /// Hard cap on scan steps before SolverError.
    long max_scan_steps = 10'000'000;

    void validate() const;
};

/// Diagnostics from one smallest-root search.
struct RootSearch {
    double t = 0.0;        // smallest zero of g(t) = log|e^{-tA} v|
    double t_lo = 0.0;     // certified left endpoint: g > 0 on (-inf, t_lo]
    long scan_steps = 0;
    int bisection_steps = 0;  // evaluations spent refining scan intervals

};

/// (R^n, D_A): the boundary minus the fixed point, for a generator A whose
/// eigenvalues all have positive real part.
///
/// D_A(x, y) = e^t for the smallest t with |e^{-tA}(y - x)| = 1. Each scan
/// interval is certified root-free through the derivative bounds
///   -mu_max <= g'(t) <= -mu_min,  mu the extreme eigenvalues of (A + A^T)/2,
/// and subdivided when the certificate fails, so dips narrower than the scan
/// step are still found. Construction
/// computes the real part Jordan form (throwing HypothesisError if the
/// positivity hypothesis fails) and the growth constant
///   C_A = safety * sup_{t<=0} ||e^{tA}|| e^{-t lambda_min} (1+|t|)^{1-m}
/// used to certify the left end of the root scan. Immutable after construction.
class BoundarySpace {
public:
    explicit BoundarySpace(MatrixSpec a, SolverConfig solver = {}, SpectralOptions spectral = {});

    int dim() const noexcept { return a_.dim(); }
    const MatrixSpec& matrix() const noexcept { return a_; }
    const RealPartJordanForm& form() const noexcept { return form_; }
    const SolverConfig& solver() const noexcept { return solver_; }
    const SpectralOptions& spectral() const noexcept { return spectral_; }
    double lambda_min() const noexcept { return lambda_min_; }
    double lambda_max() const noexcept { return lambda_max_; }
    int max_block() const noexcept { return max_block_; }
    double growth_constant() const noexcept { return growth_; }

    /// Smallest zero of log|e^{-tA} v| for v != 0.
    RootSearch smallest_root(const Vec& v) const;

    /// D_A(x, y); 0 when x == y.
    double dist(const Vec& x, const Vec& y) const;

private:
    double left_endpoint(double log_norm_v) const;

    MatrixSpec a_;
    SolverConfig solver_;
    SpectralOptions spectral_;
    RealPartJordanForm form_;
    double lambda_min_ = 0, lambda_max_ = 0;
    int max_block_ = 1;
    double growth_ = 1.0;
    Mat step_;  // e^{-h A}, h = scan_step
    long anchor_every_ = 1;  // scan steps between direct evaluations of e^{-tA} v
    double descent_ = 0;  // max(mu_max, 0): fastest decrease of g
    double ascent_ = 0;   // max(-mu_min, 0): fastest increase of g
};

/// Empirical sup of D(x,z)/(D(x,y)+D(y,z)) over sampled triples in
/// [-box_radius, box_radius]^n, floored at 1. A lower bound for the quasimetric constant.
double quasimetric_constant(const BoundarySpace& space, int samples, std::uint64_t seed, double box_radius);

/// Block layout of a matrix in real Jordan canonical form: block diagonal,
/// each block lambda*I + N or a 1x1 block.
struct CanonicalLayout {
    struct Block {
        int offset;
        int size;
        double lambda;
    };
    std::vector<Block> blocks;
    int n = 0;

    /// Throws InvalidArgument if `a` is not in that form.
    static CanonicalLayout of(const MatrixSpec& a);

    bool single_eigenvalue() const;
    /// Coordinates kept by pi_A: 1x1 blocks and the last coordinate of each larger block.
    std::vector<int> projection_coords() const;
    /// Complement of projection_coords: the first size-1 coordinates of each larger block.
    std::vector<int> fiber_coords() const;
    /// A(1): every block of size k >= 2 replaced by lambda*I_{k-1} + N.
    MatrixSpec reduced() const;
};

/// Returns (D_A(p, p'), D_{A(1)}(x, x')) for p, p' in one fiber of pi_A.
/// Requires A in single-eigenvalue canonical form.
std::pair<double, double> fiber_restriction_check(const BoundarySpace& space, const Vec& p, const Vec& q);

/// Closed-form Hausdorff distance |y - y'|^{1/lambda} between the fibers over
/// y, y' (given in projection coordinates).
double fiber_hausdorff(const BoundarySpace& space, const Vec& y, const Vec& y2);

/// Default sampling radius for fiber searches: 2 ||e^{t0 N}||_F |y - y'| with
/// t0 = ln|y - y'|/lambda, which bounds the offset of the nearest fiber point.
double default_fiber_radius(const BoundarySpace& space, const Vec& y, const Vec& y2);

/// Sampled min of D_A(p, p') over p' in the fiber over y', fiber coordinates
/// drawn uniformly within `radius` of p's. One-sided: never below the true value.
double point_to_fiber(const BoundarySpace& space, const Vec& p, const Vec& y2, int samples, std::uint64_t seed,
                      double radius);

/// For block-diagonal canonical A with k >= 2 eigenvalues: returns (sampled
/// distance from x to the slab V_1 x ... x V_{k-1} x {y_k}, D_{A_k}(x_k, y_k)).
std::pair<double, double> block_distance_check(const BoundarySpace& space, const Vec& x, const Vec& yk, int samples,
                                               std::uint64_t seed, double radius);

}  // namespace heintze

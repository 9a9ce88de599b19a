#include "heintze/boundary.hpp"

#include "heintze/error.hpp"
#include "heintze/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace heintze {

void SolverConfig::validate() const {
    if (!(scan_step > 0) || !(t_tol > 0) || !(bracket_margin > 0) || !(safety_factor >= 1) || max_scan_steps < 1)
        throw InvalidArgument("solver config: scan_step, t_tol, bracket_margin must be positive, safety_factor >= 1");
    if (!(t_tol < scan_step)) throw InvalidArgument("solver config: t_tol must be smaller than scan_step");
}

namespace {

// w <- e^{delta A} w with w kept at unit norm; the log of the discarded
// scale accumulates in log_scale.
void propagate(const Mat& a, double delta, Vec& w, double& log_scale) {
    const double norm_a = a.cwiseAbs().rowwise().sum().maxCoeff();
    const int chunks = std::max(1, static_cast<int>(std::ceil(std::abs(delta) * norm_a)));
    const double h = delta / chunks;
    for (int i = 0; i < chunks; ++i) {
        apply_exp(a, h, w);
        const double r = w.norm();
        w /= r;
        log_scale += std::log(r);
    }
}

}  // namespace

BoundarySpace::BoundarySpace(MatrixSpec a, SolverConfig solver, SpectralOptions spectral)
    : a_(std::move(a)), solver_(solver), spectral_(spectral) {
    solver_.validate();
    form_ = real_part_jordan_form(a_, spectral_);
    lambda_min_ = form_.lambda_min();
    lambda_max_ = form_.lambda_max();
    max_block_ = form_.max_block();
    step_ = expm(-solver_.scan_step * a_.matrix());
    // Repeated multiplication by step_ loses the cancellation that produces a
    // dip in g; re-anchoring keeps the propagated stretch to ||A|| dt <= 4.
    const double norm1 = a_.matrix().cwiseAbs().colwise().sum().maxCoeff();
    anchor_every_ = std::max(1L, static_cast<long>(4.0 / (std::max(norm1, 1e-300) * solver_.scan_step)));
    {
        const Eigen::SelfAdjointEigenSolver<Mat> sym(0.5 * (a_.matrix() + a_.matrix().transpose()),
                                                     Eigen::EigenvaluesOnly);
        // slack covers rounding in the Rayleigh quotient
        const double slack = 1e-12 * (1.0 + sym.eigenvalues().cwiseAbs().maxCoeff());
        descent_ = std::max(sym.eigenvalues().maxCoeff(), 0.0) + slack;
        ascent_ = std::max(-sym.eigenvalues().minCoeff(), 0.0) + slack;
    }

    // Sample ||e^{t(A - lambda_min I)}|| (1+|t|)^{1-m} for t from 0 down to
    // -50*bracket_margin. The Frobenius norm bounds the operator norm from above.
    const int n = dim();
    const Mat shifted = a_.matrix() - lambda_min_ * Mat::Identity(n, n);
    constexpr double kSampleStep = 0.05;
    const Mat back = expm(-kSampleStep * shifted);
    const int count = static_cast<int>(std::ceil(50.0 * solver_.bracket_margin / kSampleStep));
    Mat e = Mat::Identity(n, n);
    double sup = 0.0;
    for (int k = 0; k <= count; ++k) {
        const double t = k * kSampleStep;
        sup = std::max(sup, e.norm() * std::pow(1.0 + t, 1 - max_block_));
        e = e * back;
    }
    growth_ = solver_.safety_factor * sup;
}

// Smallest tau >= tau_mono with
//   log|v| + tau*lambda_min - log C_A - (m-1) log(1+tau) > 0;
// the expression increases for tau >= tau_mono, so g > 0 for all t <= -tau.
double BoundarySpace::left_endpoint(double log_norm_v) const {
    const double lam = lambda_min_;
    const int m1 = max_block_ - 1;
    auto phi = [&](double tau) { return log_norm_v + tau * lam - std::log(growth_) - m1 * std::log1p(tau); };
    const double tau_mono = std::max(0.0, m1 / lam - 1.0);
    if (phi(tau_mono) > 0) return -tau_mono;
    double lo = tau_mono, hi = tau_mono + 1.0;
    while (phi(hi) <= 0) {
        lo = hi;
        hi = tau_mono + 2.0 * (hi - tau_mono);
        if (hi > 1e12) throw SolverError("cannot certify a left bracket for the root search");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-9 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0 ? hi : lo) = mid;
    }
    return -hi;
}

RootSearch BoundarySpace::smallest_root(const Vec& v) const {
    if (v.size() != dim()) throw InvalidArgument("smallest_root: dimension mismatch");
    const double norm_v = v.norm();
    if (!(norm_v > 0) || !std::isfinite(norm_v)) throw InvalidArgument("smallest_root: v must be finite and nonzero");

    RootSearch out;
    out.t_lo = left_endpoint(std::log(norm_v));

    // w(t) = e^{-tA} v, normalized; g(t) = log|w| + log_scale
    Vec w = v / norm_v;
    double log_scale = std::log(norm_v);
    // Direct e^{-tA} v; falls back to the propagated value on overflow.
    auto anchor = [&](double t) {
        const Vec x = expm(-t * a_.matrix()) * v;
        const double r = x.norm();
        if (!(r > 0) || !std::isfinite(r)) return;
        w = x / r;
        log_scale = std::log(r);
    };
    propagate(a_.matrix(), -out.t_lo, w, log_scale);
    anchor(out.t_lo);

    // Lower bound for g on an interval of length len with endpoint values
    // ga, gb: g falls at most at rate descent_ from the left end and, read
    // backwards, at most at rate ascent_ from the right end.
    auto lower_bound = [&](double ga, double gb, double len) {
        const double c1 = descent_, c2 = ascent_;
        const double at_cross = (c2 * ga + c1 * gb - c1 * c2 * len) / (c1 + c2);
        return std::min({ga, gb, std::max(at_cross, std::min(ga, gb) - std::max(c1, c2) * len)});
    };

    struct Node {
        double a;      // left end
        Vec w;         // normalized e^{-aA} v
        double ga;     // g(a) > 0
        double len;
        double gb;     // g(a + len)
    };
    const Mat& a = a_.matrix();

    // Depth-first, left child first: returns the first interval of length
    // <= t_tol on which g changes sign, if any.
    auto refine = [&](Node root, Node& found) {
        std::vector<Node> stack{std::move(root)};
        while (!stack.empty()) {
            Node nd = std::move(stack.back());
            stack.pop_back();
            if (nd.gb > 0 && lower_bound(nd.ga, nd.gb, nd.len) > 0) continue;
            if (nd.len <= solver_.t_tol) {
                if (nd.gb <= 0) {
                    found = std::move(nd);
                    return true;
                }
                continue;  // tangential touch below resolution
            }
            const double half = 0.5 * nd.len;
            Vec wm = nd.w;
            apply_exp(a, -half, wm);
            const double r = wm.norm();
            const double gm = nd.ga + std::log(r);
            ++out.bisection_steps;
            if (out.bisection_steps > 100000) throw SolverError("root refinement did not converge");
            stack.push_back({nd.a + half, wm / r, gm, half, nd.gb});
            stack.push_back({nd.a, std::move(nd.w), nd.ga, half, gm});
        }
        return false;
    };

    const double h = solver_.scan_step;
    double t = out.t_lo;
    Node hit;
    for (;;) {
        if (out.scan_steps >= solver_.max_scan_steps) {
            std::ostringstream os;
            os.precision(12);
            os << "root scan exhausted " << solver_.max_scan_steps << " steps from t_lo=" << out.t_lo
               << " without a sign change (|v|=" << norm_v << ", last t=" << t << ")";
            throw SolverError(os.str());
        }
        Vec next = step_ * w;
        const double r = next.norm();
        next /= r;
        const double g_next = log_scale + std::log(r);
        ++out.scan_steps;
        if ((g_next <= 0 || lower_bound(log_scale, g_next, h) <= 0) && refine({t, w, log_scale, h, g_next}, hit)) break;
        w = std::move(next);
        log_scale = g_next;
        t = out.t_lo + static_cast<double>(out.scan_steps) * h;
        if (out.scan_steps % anchor_every_ == 0) anchor(t);
    }

    // Newton polish inside the final bracket: bisection alone leaves
    // e^t off by about t_tol in relative terms.
    double s = 0.5 * hit.len;
    for (int it = 0; it < 3; ++it) {
        Vec p = hit.w;
        apply_exp(a, -s, p);
        const double r2 = p.squaredNorm();
        const double g = 0.5 * std::log(r2) + hit.ga;
        const double dg = -p.dot(a * p) / r2;
        if (!(dg < 0) || g == 0) break;
        const double next = s - g / dg;
        if (!(next >= 0 && next <= hit.len)) break;
        s = next;
    }
    out.t = hit.a + s;
    return out;
}

double BoundarySpace::dist(const Vec& x, const Vec& y) const {
    if (x.size() != dim() || y.size() != dim()) {
        std::ostringstream os;
        os << "dist: points must have " << dim() << " coordinates, got " << x.size() << " and " << y.size();
        throw InvalidArgument(os.str());
    }
    if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("dist: non-finite coordinates");
    const Vec v = y - x;
    if (v.isZero(0.0)) return 0.0;
    return std::exp(smallest_root(v).t);
}

double quasimetric_constant(const BoundarySpace& space, int samples, std::uint64_t seed, double box_radius) {
    if (samples < 1) throw InvalidArgument("quasimetric_constant: samples must be >= 1");
    if (!(box_radius > 0)) throw InvalidArgument("quasimetric_constant: box_radius must be > 0");
    Sampler rng(seed);
    const int n = space.dim();
    // y = x gives ratio 1, so M >= 1 holds for every quasimetric.
    double best = 1.0;
    for (int i = 0; i < samples; ++i) {
        const Vec x = rng.cube(n, box_radius);
        const Vec y = rng.cube(n, box_radius);
        const Vec z = rng.cube(n, box_radius);
        const double denom = space.dist(x, y) + space.dist(y, z);
        if (denom == 0.0) continue;
        best = std::max(best, space.dist(x, z) / denom);
    }
    return best;
}

CanonicalLayout CanonicalLayout::of(const MatrixSpec& a) {
    const int n = a.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i || j == i + 1) continue;
            if (a(i, j) != 0.0) throw InvalidArgument("matrix is not in canonical Jordan form (off-band entry)");
        }
    }
    CanonicalLayout out;
    out.n = n;
    int start = 0;
    for (int i = 0; i < n; ++i) {
        const bool link = i + 1 < n && a(i, i + 1) != 0.0;
        if (link) {
            if (a(i, i + 1) != 1.0 || a(i, i) != a(i + 1, i + 1))
                throw InvalidArgument("matrix is not in canonical Jordan form (superdiagonal)");
            continue;
        }
        out.blocks.push_back({start, i - start + 1, a(start, start)});
        start = i + 1;
    }
    return out;
}

bool CanonicalLayout::single_eigenvalue() const {
    return std::all_of(blocks.begin(), blocks.end(), [&](const Block& b) { return b.lambda == blocks.front().lambda; });
}

std::vector<int> CanonicalLayout::projection_coords() const {
    std::vector<int> out;
    for (const auto& b : blocks) out.push_back(b.offset + b.size - 1);
    return out;
}

std::vector<int> CanonicalLayout::fiber_coords() const {
    std::vector<int> out;
    for (const auto& b : blocks)
        for (int k = 0; k + 1 < b.size; ++k) out.push_back(b.offset + k);
    return out;
}

MatrixSpec CanonicalLayout::reduced() const {
    std::vector<MatrixSpec> parts;
    for (const auto& b : blocks)
        if (b.size >= 2) parts.push_back(MatrixSpec::jordan_block(b.size - 1, b.lambda));
    if (parts.empty()) throw InvalidArgument("A(1) is empty: the fibers of pi_A are points");
    return MatrixSpec::block_diagonal(parts);
}

namespace {

Vec gather(const Vec& p, const std::vector<int>& idx) {
    Vec out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = p(idx[i]);
    return out;
}

CanonicalLayout single_eigenvalue_layout(const BoundarySpace& space) {
    auto layout = CanonicalLayout::of(space.matrix());
    if (!layout.single_eigenvalue()) throw InvalidArgument("fiber operations need a single-eigenvalue canonical matrix");
    return layout;
}

}  // namespace

std::pair<double, double> fiber_restriction_check(const BoundarySpace& space, const Vec& p, const Vec& q) {
    const auto layout = single_eigenvalue_layout(space);
    if (p.size() != space.dim() || q.size() != space.dim()) throw InvalidArgument("fiber check: dimension mismatch");
    const auto proj = layout.projection_coords();
    if (gather(p, proj) != gather(q, proj)) throw InvalidArgument("fiber check: points are not in a common fiber of pi_A");
    const double lhs = space.dist(p, q);
    const auto fib = layout.fiber_coords();
    if (fib.empty()) return {lhs, 0.0};
    const BoundarySpace reduced(layout.reduced(), space.solver(), space.spectral());
    return {lhs, reduced.dist(gather(p, fib), gather(q, fib))};
}

double fiber_hausdorff(const BoundarySpace& space, const Vec& y, const Vec& y2) {
    const auto layout = single_eigenvalue_layout(space);
    const auto m = static_cast<Eigen::Index>(layout.blocks.size());
    if (y.size() != m || y2.size() != m) throw InvalidArgument("fiber_hausdorff: expected projection coordinates");
    return std::pow((y - y2).norm(), 1.0 / layout.blocks.front().lambda);
}

double default_fiber_radius(const BoundarySpace& space, const Vec& y, const Vec& y2) {
    const auto layout = single_eigenvalue_layout(space);
    const double d = (y - y2).norm();
    if (d == 0.0) return 1.0;
    const double t0 = std::log(d) / layout.blocks.front().lambda;
    return 2.0 * std::sqrt(frob_sq(nilpotent_exp(space.max_block(), t0))) * d;
}

double point_to_fiber(const BoundarySpace& space, const Vec& p, const Vec& y2, int samples, std::uint64_t seed,
                      double radius) {
    const auto layout = single_eigenvalue_layout(space);
    if (samples < 1) throw InvalidArgument("point_to_fiber: samples must be >= 1");
    const auto proj = layout.projection_coords();
    const auto fib = layout.fiber_coords();
    if (y2.size() != static_cast<Eigen::Index>(proj.size())) throw InvalidArgument("point_to_fiber: bad y'");
    if (gather(p, proj) == y2) return 0.0;
    Sampler rng(seed);
    Vec q = p;
    for (std::size_t i = 0; i < proj.size(); ++i) q(proj[i]) = y2(static_cast<Eigen::Index>(i));
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        for (int idx : fib) q(idx) = p(idx) + rng.uniform(-radius, radius);
        best = std::min(best, space.dist(p, q));
    }
    return best;
}

std::pair<double, double> block_distance_check(const BoundarySpace& space, const Vec& x, const Vec& yk, int samples,
                                               std::uint64_t seed, double radius) {
    const auto layout = CanonicalLayout::of(space.matrix());
    if (samples < 1) throw InvalidArgument("block_distance_check: samples must be >= 1");
    const double top = space.lambda_max();
    std::vector<int> top_coords, rest;
    std::vector<MatrixSpec> top_blocks;
    for (const auto& b : layout.blocks) {
        auto& dst = b.lambda == top ? top_coords : rest;
        for (int k = 0; k < b.size; ++k) dst.push_back(b.offset + k);
        if (b.lambda == top) top_blocks.push_back(MatrixSpec::jordan_block(b.size, b.lambda));
    }
    if (rest.empty()) throw InvalidArgument("block_distance_check needs at least two distinct eigenvalues");
    if (yk.size() != static_cast<Eigen::Index>(top_coords.size())) throw InvalidArgument("block_distance_check: bad y_k");

    const BoundarySpace top_space(MatrixSpec::block_diagonal(top_blocks), space.solver(), space.spectral());
    const Vec xk = gather(x, top_coords);
    const double closed = top_space.dist(xk, yk);
    if (xk == yk) return {0.0, closed};

    Sampler rng(seed);
    Vec q = x;
    for (std::size_t i = 0; i < top_coords.size(); ++i) q(top_coords[i]) = yk(static_cast<Eigen::Index>(i));
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        for (int idx : rest) q(idx) = x(idx) + rng.uniform(-radius, radius);
        best = std::min(best, space.dist(x, q));
    }
    return {best, closed};
}

}  // namespace heintze

#pragma once

#include "heintze/linalg.hpp"
#include "heintze/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace heintze::testing {

/// Random invertible matrix with 2-norm condition number at most max_cond:
/// Q1 * diag(sigma) * Q2 with log-uniform singular values.
inline Mat random_conditioned(Sampler& rng, int n, double max_cond) {
    auto orth = [&] {
        Mat g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = rng.uniform(-1, 1);
        Eigen::HouseholderQR<Mat> qr(g);
        return Mat(qr.householderQ());
    };
    Vec sigma(n);
    for (int i = 0; i < n; ++i) sigma(i) = std::exp(rng.uniform(0, std::log(max_cond)));
    sigma(0) = 1.0;
    if (n > 1) sigma(n - 1) = max_cond * 0.999;
    return orth() * sigma.asDiagonal() * orth();
}

inline Mat conjugate(const Mat& p, const Mat& a) { return p * a * p.inverse(); }

/// e^{-tA} for A = diag(lambda): independent of the library exponential.
inline double diag_log_norm(const std::vector<double>& lambda, const Vec& v, double t) {
    double s = 0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const double c = std::exp(-t * lambda[i]) * v(static_cast<Eigen::Index>(i));
        s += c * c;
    }
    return 0.5 * std::log(s);
}

/// Smallest zero of a continuous g by brute-force scan at `step` from `lo`,
/// refined by bisection. g(lo) must be positive.
template <class G>
double scan_smallest_zero(G&& g, double lo, double hi, double step) {
    double prev_t = lo;
    double prev = g(lo);
    const long count = static_cast<long>(std::ceil((hi - lo) / step));
    for (long k = 1; k <= count; ++k) {
        const double t = lo + static_cast<double>(k) * step;
        const double cur = g(t);
        if (cur <= 0) {
            double a = prev_t, b = t;
            for (int i = 0; i < 80; ++i) {
                const double m = 0.5 * (a + b);
                (g(m) > 0 ? a : b) = m;
            }
            return 0.5 * (a + b);
        }
        prev_t = t;
        prev = cur;
    }
    (void)prev;
    return std::nan("");
}

}  // namespace heintze::testing

#include "heintze/maps.hpp"

namespace heintze::testing {

/// Random piecewise-linear function with 1..5 knots in [-2, 2] and
/// Lipschitz constant at most max_slope.
inline PiecewiseLinear random_pl(Sampler& rng, double max_slope) {
    const int k = 1 + static_cast<int>(rng.unit() * 5);
    std::vector<double> xs(static_cast<std::size_t>(k));
    for (auto& x : xs) x = rng.uniform(-2, 2);
    std::sort(xs.begin(), xs.end());
    std::vector<std::pair<double, double>> knots;
    double y = rng.uniform(-1, 1);
    for (int i = 0; i < k; ++i) {
        if (i) {
            if (!(xs[i] > xs[i - 1])) continue;
            y += rng.uniform(-max_slope, max_slope) * (xs[i] - xs[i - 1]);
        }
        knots.emplace_back(xs[i], y);
    }
    return PiecewiseLinear(std::move(knots));
}

/// Random Jordan-family map, n in {2, 3, 4}, L(C) <= max_slope.
inline JordanFamily random_jordan_family(Sampler& rng, double max_slope) {
    JordanFamily f;
    f.n = 2 + static_cast<int>(rng.unit() * 3);
    const int na = 1 + static_cast<int>(rng.unit() * (f.n - 1));
    f.a.push_back((rng.unit() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0));
    for (int k = 1; k < na; ++k) f.a.push_back(rng.uniform(-1, 1));
    f.v = rng.cube(f.n, 2.0);
    f.c = random_pl(rng, max_slope);
    return f;
}

}  // namespace heintze::testing

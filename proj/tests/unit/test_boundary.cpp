#include "support.hpp"

#include "heintze/boundary.hpp"
#include "heintze/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace heintze;
using heintze::testing::diag_log_norm;
using heintze::testing::scan_smallest_zero;

namespace {

// High-precision values for A = J_2, x = 0, y = (0, c): t* solves
// e^t = |c| sqrt(1 + t^2). Frozen from an mpmath computation at 40 digits.
struct J2Case {
    double c, t_star, dist;
};
constexpr J2Case kJ2[] = {
    {2.0, 1.0793630322406123, 2.9428044823723163},
    {0.5, -0.55772869898033081, 0.57250792607314452},
    {5.0, 2.6508405913224757, 14.165941409418306},
    {1.0, 0.0, 1.0},
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(SolverConfig, Validation) {
    EXPECT_NO_THROW(SolverConfig{}.validate());
    EXPECT_THROW((SolverConfig{0.0}).validate(), InvalidArgument);
    EXPECT_THROW((SolverConfig{1e-2, 1e-1}).validate(), InvalidArgument);
    SolverConfig c;
    c.safety_factor = 0.5;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_THROW(BoundarySpace(MatrixSpec::identity(2), SolverConfig{-1.0}), InvalidArgument);
}

TEST(BoundarySpace, CachesSpectralData) {
    const BoundarySpace s(MatrixSpec::block_diagonal({MatrixSpec::jordan_block(3, 0.5), MatrixSpec::identity(1).scaled(2)}));
    EXPECT_DOUBLE_EQ(s.lambda_min(), 0.5);
    EXPECT_DOUBLE_EQ(s.lambda_max(), 2.0);
    EXPECT_EQ(s.max_block(), 3);
    EXPECT_GE(s.growth_constant(), 2.0);
    EXPECT_THROW(BoundarySpace(MatrixSpec::diagonal({1, -1})), HypothesisError);
}

TEST(Dist, ZeroOnDiagonal) {
    const BoundarySpace s(MatrixSpec::jordan_block(3));
    const Vec x = Vec::Constant(3, 0.7);
    EXPECT_EQ(s.dist(x, x), 0.0);
}

TEST(Dist, DimensionAndFinitenessChecks) {
    const BoundarySpace s(MatrixSpec::identity(2));
    EXPECT_THROW(s.dist(Vec::Zero(2), Vec::Zero(3)), InvalidArgument);
    Vec bad = Vec::Zero(2);
    bad(0) = std::nan("");
    EXPECT_THROW(s.dist(Vec::Zero(2), bad), InvalidArgument);
}

TEST(Dist, IdentityIsEuclidean) {
    const BoundarySpace s(MatrixSpec::identity(2));
    EXPECT_NEAR(s.dist(Vec::Zero(2), (Vec(2) << 3, 4).finished()), 5.0, 1e-12);
}

TEST(Dist, ScalarMultipleOfIdentity) {
    Sampler rng(2);
    for (double lambda : {0.5, 2.0, 3.0}) {
        const BoundarySpace s(MatrixSpec::identity(3).scaled(lambda));
        for (int i = 0; i < 50; ++i) {
            const Vec x = rng.cube(3, 5), y = rng.cube(3, 5);
            EXPECT_LT(rel(s.dist(x, y), std::pow((x - y).norm(), 1 / lambda)), 1e-9);
        }
    }
}

TEST(Dist, J2FrozenOracle) {
    const BoundarySpace s(MatrixSpec::jordan_block(2));
    for (const auto& c : kJ2) {
        const Vec y = (Vec(2) << 0, c.c).finished();
        const auto root = s.smallest_root(y);
        EXPECT_NEAR(root.t, c.t_star, 1e-10) << "c=" << c.c;
        EXPECT_LT(rel(s.dist(Vec::Zero(2), y), c.dist), 1e-10) << "c=" << c.c;
    }
}

TEST(Dist, J2ScalarEquationOracle) {
    // Independent check of the frozen values: scan e^t - |c| sqrt(1+t^2) directly.
    for (const auto& c : kJ2) {
        auto g = [&](double t) { return std::log(c.c) + 0.5 * std::log1p(t * t) - t; };
        const double t = scan_smallest_zero(g, -20.0, 20.0, 1e-5);
        EXPECT_NEAR(t, c.t_star, 1e-9);
    }
}

TEST(Dist, DiagonalAgainstIndependentScan) {
    Sampler rng(4);
    const std::vector<double> lambda{0.7, 1.3, 2.5};
    const BoundarySpace s(MatrixSpec::diagonal(lambda));
    for (int i = 0; i < 20; ++i) {
        const Vec v = rng.cube(3, 4.0);
        auto g = [&](double t) { return diag_log_norm(lambda, v, t); };
        const double t = scan_smallest_zero(g, -30.0, 30.0, 1e-4);
        EXPECT_LT(rel(s.dist(Vec::Zero(3), v), std::exp(t)), 1e-9);
    }
}

TEST(Dist, RootSearchDiagnostics) {
    const BoundarySpace s(MatrixSpec::jordan_block(3));
    const auto r = s.smallest_root((Vec(3) << 1, -2, 0.5).finished());
    EXPECT_LT(r.t_lo, r.t);
    EXPECT_GT(r.scan_steps, 0);
    EXPECT_GT(r.bisection_steps, 0);
    EXPECT_THROW(s.smallest_root(Vec::Zero(3)), InvalidArgument);
}

TEST(Dist, DipNarrowerThanScanStep) {
    // J2 with v = e^{t0 N}(0, b): g(t0) = log(depth) and the dip is ~3e-3 wide
    const double lambda = 0.1, t0 = 0.3, depth = 1 - 1e-6;
    const BoundarySpace s(MatrixSpec::jordan_block(2, lambda));
    const Vec v = nilpotent_exp(2, t0).matrix() * (Vec(2) << 0, depth * std::exp(lambda * t0)).finished();
    auto g = [&](double t) { return std::log((nilpotent_exp(2, -t).matrix() * v).norm()) - lambda * t; };
    const double oracle = scan_smallest_zero(g, t0 - 1, t0 + 1, 1e-6);
    ASSERT_LT(oracle, t0);
    ASSERT_GT(g(t0 - 1), 0);
    EXPECT_NEAR(s.smallest_root(v).t, oracle, 1e-6);
}

TEST(Dist, ConjugatedBlockFarFromBracket) {
    // t_lo lands near -150; plain forward propagation drifts past the dip
    const Mat a = (Mat(4, 4) << -0.56932214888081722, 1.3291578996822428, 0.14926163939520642, -2.9323797054987644,
                   -2.6986308722170329, 4.7145787946761279, -3.2879052129519049, -3.9909450165494347,
                   -2.3373840024390979, 3.4353923172151544, -3.1985506826212791, -1.4980875482659872,
                   -0.9848745528667614, 1.6929068858865235, -1.7213996404991081, -0.54670596317403253)
                      .finished();
    const Vec v = (Vec(4) << 1.0539473480032708, 3.0042875118176173, 1.801678412250411, 0.54175748060748963).finished();
    const auto r = BoundarySpace(MatrixSpec(a)).smallest_root(v);
    EXPECT_LT(r.t_lo, -100);
    EXPECT_NEAR(r.t, 1.44044978, 1e-6);
}

TEST(Dist, ScanCapRaisesSolverError) {
    SolverConfig cfg;
    cfg.max_scan_steps = 3;
    const BoundarySpace s(MatrixSpec::identity(2), cfg);
    EXPECT_THROW(s.dist(Vec::Zero(2), (Vec(2) << 1e6, 0).finished()), SolverError);
}

TEST(DistProperty, Symmetry) {
    Sampler rng(5);
    for (const auto& a : {MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3), MatrixSpec::diagonal({1, 2}),
                          MatrixSpec::from_rows({{1, -1}, {1, 1}})}) {
        const BoundarySpace s(a);
        for (int i = 0; i < 100; ++i) {
            const Vec x = rng.cube(a.dim(), 3), y = rng.cube(a.dim(), 3);
            EXPECT_EQ(s.dist(x, y), s.dist(y, x));
        }
    }
}

TEST(DistProperty, TranslationInvariance) {
    Sampler rng(6);
    for (const auto& a : {MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3), MatrixSpec::diagonal({1, 2})}) {
        const BoundarySpace s(a);
        for (int i = 0; i < 100; ++i) {
            const Vec x = rng.cube(a.dim(), 3), y = rng.cube(a.dim(), 3), z = rng.cube(a.dim(), 50);
            EXPECT_LT(rel(s.dist(x + z, y + z), s.dist(x, y)), 1e-9);
        }
    }
}

TEST(DistProperty, DilationSimilarity) {
    Sampler rng(7);
    for (const auto& a : {MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3), MatrixSpec::diagonal({1, 2})}) {
        const BoundarySpace s(a);
        for (int i = 0; i < 100; ++i) {
            const double t = rng.uniform(-3, 3);
            const Mat e = mat_exp(a, t).matrix();
            const Vec x = rng.cube(a.dim(), 3), y = rng.cube(a.dim(), 3);
            EXPECT_LT(rel(s.dist(e * x, e * y), std::exp(t) * s.dist(x, y)), 1e-8);
        }
    }
}

TEST(QuasimetricConstant, Examples) {
    const double euclid = quasimetric_constant(BoundarySpace(MatrixSpec::identity(2)), 2000, 0, 1.0);
    EXPECT_LE(euclid, 1 + 1e-6);
    const BoundarySpace d(MatrixSpec::diagonal({1, 2}));
    const double m1 = quasimetric_constant(d, 10000, 1, 1.0);
    const double m2 = quasimetric_constant(d, 10000, 2, 1.0);
    EXPECT_GE(m1, 1.0);
    EXPECT_LT(std::abs(m1 - m2), 0.1 * std::max(m1, m2));
    const double j = quasimetric_constant(BoundarySpace(MatrixSpec::jordan_block(2)), 2000, 3, 1.0);
    EXPECT_GE(j, 1.0);
    EXPECT_TRUE(std::isfinite(j));
}

TEST(CanonicalLayout, Blocks) {
    const auto l = CanonicalLayout::of(
        MatrixSpec::block_diagonal({MatrixSpec::identity(1), MatrixSpec::jordan_block(3), MatrixSpec::jordan_block(2)}));
    ASSERT_EQ(l.blocks.size(), 3u);
    EXPECT_EQ(l.projection_coords(), (std::vector<int>{0, 3, 5}));
    EXPECT_EQ(l.fiber_coords(), (std::vector<int>{1, 2, 4}));
    EXPECT_TRUE(l.single_eigenvalue());
    EXPECT_EQ(l.reduced(), MatrixSpec::block_diagonal({MatrixSpec::jordan_block(2), MatrixSpec::identity(1)}));
    EXPECT_THROW(CanonicalLayout::of(MatrixSpec::from_rows({{1, 0}, {1, 1}})), InvalidArgument);
}

TEST(Fiber, J2AlongXAxis) {
    const BoundarySpace s(MatrixSpec::jordan_block(2));
    const auto [d, reduced] = fiber_restriction_check(s, Vec::Zero(2), (Vec(2) << 3, 0).finished());
    EXPECT_NEAR(d, 3.0, 1e-11);
    EXPECT_NEAR(reduced, 3.0, 1e-11);
    const auto [z0, z1] = fiber_restriction_check(s, Vec::Zero(2), Vec::Zero(2));
    EXPECT_EQ(z0, 0.0);
    EXPECT_EQ(z1, 0.0);
    EXPECT_THROW(fiber_restriction_check(s, Vec::Zero(2), (Vec(2) << 0, 1).finished()), InvalidArgument);
}

TEST(FiberProperty, RestrictionAgrees) {
    Sampler rng(8);
    const MatrixSpec cases[] = {MatrixSpec::jordan_block(3), MatrixSpec::jordan_block(3, 2.0),
                                MatrixSpec::block_diagonal({MatrixSpec::identity(1), MatrixSpec::jordan_block(2)}),
                                MatrixSpec::block_diagonal({MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3)})};
    for (const auto& a : cases) {
        const BoundarySpace s(a);
        const auto fib = CanonicalLayout::of(a).fiber_coords();
        for (int i = 0; i < 50; ++i) {
            const Vec p = rng.cube(a.dim(), 2);
            Vec q = p;
            for (int idx : fib) q(idx) += rng.uniform(-2, 2);
            const auto [lhs, rhs] = fiber_restriction_check(s, p, q);
            EXPECT_LT(rel(lhs, rhs), 1e-8);
        }
    }
}

TEST(Fiber, HausdorffClosedForm) {
    const Vec y0 = Vec::Zero(1), y4 = (Vec(1) << 4).finished();
    EXPECT_DOUBLE_EQ(fiber_hausdorff(BoundarySpace(MatrixSpec::jordan_block(2)), y0, y4), 4.0);
    EXPECT_DOUBLE_EQ(fiber_hausdorff(BoundarySpace(MatrixSpec::jordan_block(2, 2.0)), y0, y4), 2.0);
    EXPECT_THROW(fiber_hausdorff(BoundarySpace(MatrixSpec::diagonal({1, 2})), y0, y4), InvalidArgument);
}

TEST(Fiber, SampledDistanceApproachesFromAbove) {
    const BoundarySpace s(MatrixSpec::jordan_block(2));
    Sampler rng(9);
    for (int i = 0; i < 3; ++i) {
        const Vec p = rng.cube(2, 1);
        const Vec y2 = (Vec(1) << p(1) + rng.uniform(0.5, 3)).finished();
        const Vec y = (Vec(1) << p(1)).finished();
        const double closed = fiber_hausdorff(s, y, y2);
        const double sampled = point_to_fiber(s, p, y2, 10000, 10 + i, default_fiber_radius(s, y, y2));
        EXPECT_GE(sampled, closed * (1 - 1e-9));
        EXPECT_LE(sampled, closed * 1.05);
    }
}

TEST(BlockDistance, DiagonalClosedForm) {
    const BoundarySpace s(MatrixSpec::diagonal({1, 2}));
    const Vec x = (Vec(2) << 0.3, -0.2).finished();
    const Vec yk = (Vec(1) << 1.4).finished();
    const auto [sampled, closed] = block_distance_check(s, x, yk, 10000, 1, 3.0);
    EXPECT_NEAR(closed, std::sqrt(1.6), 1e-10);
    EXPECT_GE(sampled, closed * (1 - 1e-9));
    EXPECT_LE(sampled, closed * 1.05);
    const auto [z, zc] = block_distance_check(s, x, (Vec(1) << -0.2).finished(), 10, 1, 1.0);
    EXPECT_EQ(z, 0.0);
    EXPECT_EQ(zc, 0.0);
}

TEST(BlockDistance, MixedJordanBlock) {
    const BoundarySpace s(MatrixSpec::block_diagonal({MatrixSpec::identity(1), MatrixSpec::jordan_block(2, 2.0)}));
    const Vec x = (Vec(3) << 0.1, 0.2, -0.3).finished();
    const Vec yk = (Vec(2) << 1.0, 0.5).finished();
    const auto [sampled, closed] = block_distance_check(s, x, yk, 10000, 2, 2.0);
    const BoundarySpace top(MatrixSpec::jordan_block(2, 2.0));
    EXPECT_NEAR(closed, top.dist(x.tail(2), yk), 1e-12);
    EXPECT_GE(sampled, closed * (1 - 1e-9));
    EXPECT_LE(sampled, closed * 1.05);
    EXPECT_THROW(block_distance_check(BoundarySpace(MatrixSpec::jordan_block(2)), Vec::Zero(2),
                                      Vec::Zero(2), 10, 0, 1.0),
                 InvalidArgument);
}

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "support.hpp"

#include "cli.hpp"
#include "manifest.hpp"

#include "heintze/boundary.hpp"
#include "heintze/io.hpp"
#include "heintze/maps.hpp"
#include "heintze/spectral.hpp"
#include "heintze/variation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace heintze;
namespace fs = std::filesystem;
namespace ht = heintze::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. dist for I_n and lambda*I_n against the closed forms.
Outcome metric_oracles() {
    Sampler rng(101);
    double worst = 0;
    for (int n = 1; n <= 4; ++n) {
        const BoundarySpace id(MatrixSpec::identity(n));
        for (int i = 0; i < 1000; ++i) {
            const Vec x = rng.cube(n, 10), y = rng.cube(n, 10);
            worst = std::max(worst, rel(id.dist(x, y), (x - y).norm()));
        }
    }
    for (double lambda : {0.5, 2.0, 3.0}) {
        const BoundarySpace s(MatrixSpec::identity(3).scaled(lambda));
        for (int i = 0; i < 1000; ++i) {
            const Vec x = rng.cube(3, 10), y = rng.cube(3, 10);
            worst = std::max(worst, rel(s.dist(x, y), std::pow((x - y).norm(), 1 / lambda)));
        }
    }
    return {worst <= 1e-9, fmt("7000 pairs, worst relative error %.2e (tol 1e-9)", worst)};
}

// 2. translation invariance and dilation similarity.
Outcome symmetry_suite() {
    Sampler rng(102);
    const MatrixSpec mats[] = {MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3), MatrixSpec::diagonal({1, 2}),
                               MatrixSpec::from_rows({{1, -1}, {1, 1}})};
    double worst_t = 0, worst_d = 0;
    for (const auto& a : mats) {
        const BoundarySpace s(a);
        const int n = a.dim();
        for (int i = 0; i < 1000; ++i) {
            const Vec x = rng.cube(n, 3), y = rng.cube(n, 3), z = rng.cube(n, 20);
            const double d = s.dist(x, y);
            worst_t = std::max(worst_t, rel(s.dist(x + z, y + z), d));
            const double t = rng.uniform(-3, 3);
            const Mat e = mat_exp(a, t).matrix();
            worst_d = std::max(worst_d, rel(s.dist(e * x, e * y), std::exp(t) * d));
        }
    }
    return {worst_t <= 1e-8 && worst_d <= 1e-8,
            fmt("4 generators x 1000, worst translation %.2e, dilation %.2e (tol 1e-8)", worst_t, worst_d)};
}

// 3. fiber restriction equality and the sampled Hausdorff estimator.
Outcome fiber_formulas() {
    Sampler rng(103);
    const MatrixSpec mats[] = {MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3),
                               MatrixSpec::jordan_block(3, 2.0),
                               MatrixSpec::block_diagonal({MatrixSpec::identity(1), MatrixSpec::jordan_block(2)}),
                               MatrixSpec::block_diagonal({MatrixSpec::jordan_block(2), MatrixSpec::jordan_block(3)})};
    double worst = 0;
    for (const auto& a : mats) {
        const BoundarySpace s(a);
        const auto fib = CanonicalLayout::of(a).fiber_coords();
        for (int i = 0; i < 200; ++i) {
            const Vec p = rng.cube(a.dim(), 2);
            Vec q = p;
            for (int idx : fib) q(idx) += rng.uniform(-3, 3);
            const auto [lhs, rhs] = fiber_restriction_check(s, p, q);
            worst = std::max(worst, rel(lhs, rhs));
        }
    }
    const BoundarySpace j2(MatrixSpec::jordan_block(2));
    double worst_over = 0;
    bool below = false;
    for (int i = 0; i < 5; ++i) {
        const Vec p = rng.cube(2, 1);
        const Vec y = (Vec(1) << p(1)).finished();
        const Vec y2 = (Vec(1) << p(1) + rng.uniform(0.2, 4)).finished();
        const double closed = fiber_hausdorff(j2, y, y2);
        const double sampled = point_to_fiber(j2, p, y2, 10000, 200 + i, default_fiber_radius(j2, y, y2));
        below |= sampled < closed * (1 - 1e-9);
        worst_over = std::max(worst_over, sampled / closed - 1);
    }
    return {worst <= 1e-8 && !below && worst_over <= 0.05,
            fmt("restriction worst %.2e (tol 1e-8); Hausdorff 5 x 1e4 samples, %s, worst excess %.2f%% (tol 5%%)",
                worst, below ? "estimate fell below closed form" : "all from above", 100 * worst_over)};
}

// 4. hand-built verdicts and random conjugation pairs.
Outcome classification() {
    struct Pair {
        MatrixSpec a, b;
        bool equivalent;
        double scale;
    };
    Sampler rng(104);
    const Mat p = ht::random_conditioned(rng, 2, 1e3);
    const std::vector<Pair> pairs = {
        {MatrixSpec::diagonal({1, 2}), MatrixSpec::diagonal({2, 4}), true, 0.5},
        {MatrixSpec::diagonal({1, 2}), MatrixSpec::diagonal({1, 3}), false, 0},
        {MatrixSpec::jordan_block(2), MatrixSpec(ht::conjugate(p, MatrixSpec::jordan_block(2).matrix())), true, 1},
        {MatrixSpec::jordan_block(2), MatrixSpec::identity(2), false, 0},
        {MatrixSpec::from_rows({{1, -1}, {1, 1}}), MatrixSpec::identity(2), true, 1},
        {MatrixSpec::jordan_block(3), MatrixSpec::jordan_block(3, 2.0), true, 0.5},
    };
    int hand_ok = 0;
    for (const auto& c : pairs) {
        const auto r = classify(c.a, c.b);
        const bool ok = r.equivalent == c.equivalent && (!c.equivalent || rel(*r.scale, c.scale) <= 1e-6);
        hand_ok += ok;
    }
    int random_ok = 0;
    double worst_scale = 0;
    const double lambdas[] = {0.5, 1.0, 1.7, 3.0};
    for (int i = 0; i < 50; ++i) {
        std::vector<MatrixSpec> blocks;
        int n = 0;
        const int target = 2 + i % 4;
        while (n < target) {
            const int size = std::min(target - n, 1 + static_cast<int>(rng.unit() * 3));
            blocks.push_back(MatrixSpec::jordan_block(size, lambdas[static_cast<int>(rng.unit() * 4)]));
            n += size;
        }
        const MatrixSpec a = MatrixSpec::block_diagonal(blocks);
        const Mat q = ht::random_conditioned(rng, n, std::exp(rng.uniform(0, std::log(1e3))));
        const auto r = classify(a, MatrixSpec(ht::conjugate(q, a.matrix())));
        if (r.equivalent) {
            worst_scale = std::max(worst_scale, std::abs(*r.scale - 1));
            random_ok += std::abs(*r.scale - 1) <= 1e-6;
        }
    }
    return {hand_ok == 6 && random_ok == 50,
            fmt("hand-built %d/6; random conjugations %d/50 equivalent, worst |scale-1| %.2e (tol 1e-6)", hand_ok,
                random_ok, worst_scale)};
}

// 5. Q-variation slopes for diag(1,2) and the flat n-variation of J_2.
Outcome q_variation() {
    const auto r = fit_exponents(MatrixSpec::diagonal({1, 2}), TestFunction::coordinate(2, 1),
                                 Box::parse("0,0.25;0,0.25"), {-6, -5, -4}, {1, 1.5, 2});
    bool ok = true;
    std::string slopes;
    for (const auto& f : r.fits) {
        ok &= std::abs(f.slope - f.predicted) <= 0.1 * std::max(1.0, std::abs(f.predicted));
        slopes += fmt("%s%.4f", slopes.empty() ? "" : ",", f.slope);
    }
    const Box box = Box::unit(2);
    double worst_factor = 1;
    for (double t : {-6.0, -5.0, -4.0}) {
        const double v = variation_sum({MatrixSpec::jordan_block(2), t, box}, TestFunction::coordinate(2, 1), 2.0);
        worst_factor = std::max({worst_factor, v / box.volume(), box.volume() / v});
    }
    ok &= worst_factor <= 4;
    return {ok, fmt("diag(1,2) slopes {%s} vs {-1,0,1} (tol 10%%); J_2 V_2 within factor %.3f of Vol (tol 4)",
                    slopes.c_str(), worst_factor)};
}

// 6. empirical distortion of random Jordan-family maps against the bound.
Outcome map_bounds() {
    Sampler rng(106);
    int violations = 0;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const QSMap m(ht::random_jordan_family(rng, 2.0));
        const BoundarySpace s(MatrixSpec::jordan_block(m.dim()));
        const double bound = *theoretical_bound(m);
        const auto r = empirical_bilip(m, s, 10000, 1000 + static_cast<std::uint64_t>(i));
        if (r.max_ratio > bound || r.min_ratio < 1 / bound) ++violations;
        worst = std::max({worst, std::log(r.max_ratio) / std::log(bound), -std::log(r.min_ratio) / std::log(bound)});
    }
    return {violations == 0,
            fmt("100 maps x 1e4 pairs, %d violations; largest log-distortion %.1f%% of log-bound", violations,
                100 * worst)};
}

// 7. conformality probe along x = e^{tN}(0, e^t).
Outcome conformality() {
    const QSMap lin(Shear{2, PiecewiseLinear::affine(1, 0)});
    const QSMap flat(Shear{2, PiecewiseLinear::constant(0.7)});
    const auto p1 = conformal_probe(lin, Vec::Zero(2), {-8});
    const auto p0 = conformal_probe(flat, Vec::Zero(2), {-8});
    const double s1 = p1.rows[0].stretch, s0 = p0.rows[0].stretch;
    const bool ok = rel(s1, std::sqrt(2.0)) <= 0.05 && std::abs(s0 - 1) <= 0.02 && std::abs(p0.rows[0].distortion - 1) <= 0.02;
    return {ok, fmt("C(y)=y: stretch %.6f vs sqrt(2) (tol 5%%), D-ratio %.6f; C const: stretch %.6f, D-ratio %.6f (tol 2%%)",
                    s1, p1.rows[0].distortion, s0, p0.rows[0].distortion)};
}

// 8. production smallest root against a 1e-5 brute-force scan.
struct RootCase {
    Mat j;  // real Jordan matrix, exponentiated in closed form below
    Mat p;  // A = P J P^{-1}
    Vec w;  // v = P w
    std::vector<std::pair<int, int>> blocks;  // (offset, size); size 2 with j(o,o+1) < 0 is a rotation
};

// e^{-tJ} w for block-diagonal J with Jordan or rotation blocks.
Vec closed_form(const RootCase& c, double t) {
    Vec out(c.w.size());
    for (const auto& [o, m] : c.blocks) {
        const double lambda = c.j(o, o);
        const double decay = std::exp(-lambda * t);
        if (m == 2 && c.j(o, o + 1) < 0) {
            const double om = c.j(o + 1, o);
            const double cs = std::cos(om * t), sn = std::sin(om * t);
            out(o) = decay * (cs * c.w(o) + sn * c.w(o + 1));
            out(o + 1) = decay * (-sn * c.w(o) + cs * c.w(o + 1));
            continue;
        }
        for (int i = 0; i < m; ++i) {
            double s = 0, term = 1;
            for (int k = 0; i + k < m; ++k) {
                if (k) term *= -t / k;
                s += term * c.w(o + i + k);
            }
            out(o + i) = decay * s;
        }
    }
    return out;
}

// Coarse check that g changes sign at least twice; keeps the corpus adversarial.
bool has_two_zeros(const RootCase& c) {
    int changes = 0;
    double prev = std::log((c.p * closed_form(c, -60)).norm());
    for (double t = -60; t <= 60 && changes < 2; t += 1e-3) {
        const double cur = std::log((c.p * closed_form(c, t)).norm());
        changes += (prev > 0) != (cur > 0);
        prev = cur;
    }
    return changes >= 2;
}

std::vector<RootCase> root_corpus() {
    Sampler rng(108);
    std::vector<RootCase> corpus;
    // Single Jordan blocks with v = e^{t0 N}(0,..,0,b): the polynomial factor
    // collapses near t0 and g dips below zero there before rising again.
    const double lambdas[] = {0.1, 0.2, 0.5};
    const double depths[] = {0.9, 0.99, 0.999, 0.9999};
    for (int m = 2; m <= 4; ++m) {
        for (int k = 0, kept = 0; kept < 12; ++k) {
            const double lambda = lambdas[k % 3];
            const double t0 = rng.uniform(-3, 2);
            const double depth = depths[k % 4];
            RootCase c;
            c.j = MatrixSpec::jordan_block(m, lambda).matrix();
            c.blocks = {{0, m}};
            c.p = kept < 6 ? Mat::Identity(m, m) : ht::random_conditioned(rng, m, 10.0);
            // g(t0) = log(depth) after conjugation as well
            Vec top = Vec::Zero(m);
            top(m - 1) = depth * std::exp(lambda * t0) / c.p.col(m - 1).norm();
            c.w = nilpotent_exp(m, t0).matrix() * top;
            if (!has_two_zeros(c)) continue;
            corpus.push_back(std::move(c));
            ++kept;
        }
    }
    // Non-normal rotations: oscillating norms with several zeros.
    for (int kept = 0; kept < 14;) {
        const int n = kept < 7 ? 2 : 4;
        RootCase c;
        c.j = Mat::Zero(n, n);
        for (int o = 0; o < n; o += 2) {
            const double lambda = rng.uniform(0.1, 0.4), om = rng.uniform(2, 8);
            c.j(o, o) = c.j(o + 1, o + 1) = lambda;
            c.j(o, o + 1) = -om;
            c.j(o + 1, o) = om;
            c.blocks.emplace_back(o, 2);
        }
        c.p = ht::random_conditioned(rng, n, 30.0);
        c.w = rng.direction(n) * rng.uniform(0.5, 3);
        if (!has_two_zeros(c)) continue;
        corpus.push_back(std::move(c));
        ++kept;
    }
    return corpus;
}

Outcome smallest_root() {
    const auto corpus = root_corpus();
    int agree = 0, multi = 0;
    double worst = 0;
    for (const auto& c : corpus) {
        const Mat a = c.p * c.j * c.p.inverse();
        const Vec v = c.p * c.w;
        auto g = [&](double t) { return std::log((c.p * closed_form(c, t)).norm()); };
        const BoundarySpace s{MatrixSpec(a)};
        const double t = s.smallest_root(v).t;
        // brute force: every zero in [-60, max(40, t + 1)] at step 1e-5; the
        // first is t*. Conjugated blocks can push t* past 40.
        constexpr double h = 1e-5, lo = -60;
        const double hi = std::max(40.0, t + 1);
        double oracle = std::nan(""), second = std::nan("");
        int zeros = 0;
        double prev = g(lo);
        for (long i = 1; i <= static_cast<long>((hi - lo) / h) && zeros < 2; ++i) {
            const double t = lo + static_cast<double>(i) * h;
            const double cur = g(t);
            if ((prev > 0) != (cur > 0)) {
                const double z = t - h * cur / (cur - prev);
                (zeros++ == 0 ? oracle : second) = z;
            }
            prev = cur;
        }
        multi += zeros >= 2;
        const double err = std::abs(t - oracle);
        worst = std::max(worst, std::isnan(err) ? INFINITY : err);
        agree += err <= 1e-4;
        if (std::getenv("HEINTZE_ACCEPTANCE_VERBOSE"))
            std::fprintf(stderr, "  root case n=%d zeros=%d oracle=%.8f (next %.8f) solver=%.8f\n",
                         static_cast<int>(v.size()), zeros, oracle, second, t);
    }
    return {agree == static_cast<int>(corpus.size()),
            fmt("%d/%zu cases agree (%d with >= 2 zeros), worst |dt| %.2e (tol 1e-4)", agree, corpus.size(), multi,
                worst)};
}

// 9. identical command lines produce byte-identical report bodies, also via replay.
Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "heintze_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream(dir / name) << body;
        return (dir / name).string();
    };
    const auto m = write("d12.json", R"({"rows":[[1,0],[0,2]]})");
    const auto jf = write("jf.json", R"({"kind":"jordan_family","n":3,"a":[1.0,0.5],"v":[0,1,0],"C":{"knots":[[-1,0],[1,1]]}})");
    const auto sh = write("shear.json", R"({"kind":"shear","n":2,"C":{"knots":[[0,0],[1,1]]}})");
    struct Run {
        std::vector<std::string> args;
        std::vector<std::string> outputs;
    };
    const auto out = [&](const std::string& n) { return (dir / n).string(); };
    const std::vector<Run> runs = {
        {{"qvar", "--matrix", m, "--u", "2", "--box", "0,0.25;0,0.25", "--t", "-6:-4:1", "--q", "1,1.5,2", "--out",
          out("qvar.csv")},
         {"qvar.csv", "qvar-fits.csv"}},
        {{"qsmap-verify", "--map", jf, "--samples", "2000", "--triples", "500", "--seed", "7", "--out", out("qs.csv")},
         {"qs.csv", "qs-eta.csv"}},
        {{"conformal-probe", "--map", sh, "--t", "-1:-8:-1", "--out", out("cp.csv")}, {"cp.csv"}},
    };
    int identical = 0, total = 0;
    std::ostringstream sink;
    for (const auto& r : runs) {
        std::vector<std::string> bodies[3];
        for (int k = 0; k < 3; ++k) {
            const int code = k < 2 ? cli::run(r.args, sink, sink)
                                   : cli::run({"replay", cli::manifest_path_for(r.args.back()).string()}, sink, sink);
            if (code != 0) return {false, "command failed: " + r.args.front() + "\n" + sink.str()};
            for (const auto& f : r.outputs) bodies[k].push_back(read_text_file(dir / f));
        }
        for (std::size_t f = 0; f < r.outputs.size(); ++f) {
            total += 2;
            identical += bodies[0][f] == bodies[1][f];
            identical += bodies[0][f] == bodies[2][f];
        }
    }
    fs::remove_all(dir);
    return {identical == total, fmt("%d/%d report bodies byte-identical across rerun and manifest replay", identical, total)};
}

}  // namespace

int main(int argc, char** argv) {
    // optional arguments select criteria by number
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"metric oracles", metric_oracles},   {"symmetry and invariance", symmetry_suite},
        {"fiber formulas", fiber_formulas},   {"classification", classification},
        {"Q-variation scaling", q_variation}, {"map bounds", map_bounds},
        {"conformality probe", conformality}, {"smallest-root correctness", smallest_root},
        {"CLI determinism", cli_determinism},
    };
    int failed = 0, index = 0, run = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end()) continue;
        ++run;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", run - failed, run);
    return failed ? 1 : 0;
}

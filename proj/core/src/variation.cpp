#include "heintze/variation.hpp"

#include "heintze/error.hpp"
#include "heintze/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace heintze {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() < 1 || lo.size() != hi.size()) throw InvalidArgument("box corners must have equal, positive dimension");
    if (!lo.allFinite() || !hi.allFinite()) throw InvalidArgument("box corners must be finite");
    if (!(lo.array() < hi.array()).all()) throw InvalidArgument("box is degenerate: need lo < hi in every coordinate");
}

Box Box::unit(int n) { return Box(Vec::Zero(n), Vec::Ones(n)); }

Box Box::parse(std::string_view text) {
    std::vector<double> lo, hi;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t semi = std::min(text.find(';', pos), text.size());
        const std::string part(text.substr(pos, semi - pos));
        double a = 0, b = 0;
        char tail = 0;
        if (std::sscanf(part.c_str(), " %lf , %lf %c", &a, &b, &tail) != 2)
            throw ParseError("cannot parse box interval '" + part + "' (expected lo,hi)");
        lo.push_back(a);
        hi.push_back(b);
        pos = semi + 1;
    }
    return Box(Eigen::Map<Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
               Eigen::Map<Vec>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

double Box::volume() const { return (hi - lo).prod(); }

bool Box::contains(const Box& inner) const {
    return inner.dim() == dim() && (lo.array() <= inner.lo.array()).all() && (inner.hi.array() <= hi.array()).all();
}

namespace {

// Cells are half-open: z + [0, 1-kUpperShrink]^n is tested in closed form.
constexpr double kUpperShrink = 1e-9;
constexpr double kContactSlack = 1e-12;

// Exact intersection test between the half-open lattice cell at z and the
// parallelotope P = M(box), M = e^{-tA}. P - cell is a zonotope; it contains
// the origin iff |nu . centre| <= h_nu for every facet normal nu.
class PackingGeometry {
public:
    explicit PackingGeometry(const PackingSpec& spec) : n_(spec.box.dim()) {
        if (spec.a.dim() != n_) throw InvalidArgument("packing: matrix and box dimensions differ");
        if (spec.max_cells < 1) throw InvalidArgument("packing: max_cells must be >= 1");
        const Mat m = mat_exp(spec.a, -spec.t).matrix();
        const Vec width = spec.box.hi - spec.box.lo;
        const Vec centre = m * (0.5 * (spec.box.lo + spec.box.hi));
        const double side = 1.0 - kUpperShrink;

        Mat gens(n_, 2 * n_);
        gens.leftCols(n_) = m * width.asDiagonal();
        gens.rightCols(n_) = side * Mat::Identity(n_, n_);

        const Vec half_extent = 0.5 * (m.cwiseAbs() * width);
        lo_.resize(static_cast<std::size_t>(n_));
        hi_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            lo_[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(centre(i) - half_extent(i))) - 1;
            hi_[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil(centre(i) + half_extent(i)));
        }

        const Vec shift = centre - 0.5 * side * Vec::Ones(n_);
        for_each_subset(2 * n_, n_ - 1, [&](const std::vector<int>& subset) {
            Vec nu = normal(gens, subset);
            const double len = nu.norm();
            if (len < 1e-12) return;
            nu /= len;
            double h = 0.0;
            for (int j = 0; j < 2 * n_; ++j) h += std::abs(nu.dot(gens.col(j)));
            h *= 0.5;
            const double a = nu.dot(shift);
            facets_.push_back({nu, a, h + kContactSlack * (std::abs(a) + h + 1.0)});
        });
    }

    // Visits feasible cells in lexicographic order; the last coordinate's
    // range is solved in closed form per row.
    template <class Visit>
    void for_each_row(Visit&& visit) const {
        std::vector<long> z(static_cast<std::size_t>(n_));
        recurse(0, z, visit);
    }

private:
    struct Facet {
        Vec nu;
        double a;  // nu . (centre - side/2 * 1)
        double h;  // support half-width plus contact slack
    };

    template <class F>
    static void for_each_subset(int total, int k, F&& f) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == k) {
                f(idx);
                return;
            }
            for (int i = start; i < total; ++i) {
                idx[static_cast<std::size_t>(depth)] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }

    // Generalized cross product of the selected n-1 generator columns.
    Vec normal(const Mat& gens, const std::vector<int>& subset) const {
        Vec nu(n_);
        if (n_ == 1) {
            nu(0) = 1.0;
            return nu;
        }
        Mat g(n_, n_ - 1);
        for (int c = 0; c < n_ - 1; ++c) g.col(c) = gens.col(subset[static_cast<std::size_t>(c)]);
        Mat minor(n_ - 1, n_ - 1);
        for (int i = 0; i < n_; ++i) {
            for (int r = 0, rr = 0; r < n_; ++r) {
                if (r == i) continue;
                minor.row(rr++) = g.row(r);
            }
            nu(i) = ((i % 2) ? -1.0 : 1.0) * minor.determinant();
        }
        return nu;
    }

    template <class Visit>
    void recurse(int depth, std::vector<long>& z, Visit& visit) const {
        const auto d = static_cast<std::size_t>(depth);
        if (depth < n_ - 1) {
            for (long v = lo_[d]; v <= hi_[d]; ++v) {
                z[d] = v;
                recurse(depth + 1, z, visit);
            }
            return;
        }
        // last coordinate: intersect the intervals from every facet
        double lo = static_cast<double>(lo_[d]);
        double hi = static_cast<double>(hi_[d]);
        const int last = n_ - 1;
        for (const auto& f : facets_) {
            double alpha = f.a;
            for (int i = 0; i < last; ++i) alpha -= f.nu(i) * static_cast<double>(z[static_cast<std::size_t>(i)]);
            const double c = f.nu(last);
            if (std::abs(c) < 1e-14) {
                if (std::abs(alpha) > f.h) return;
                continue;
            }
            double a = (alpha - f.h) / c, b = (alpha + f.h) / c;
            if (a > b) std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
            if (lo > hi) return;
        }
        const long first = static_cast<long>(std::ceil(lo));
        const long end = static_cast<long>(std::floor(hi));
        if (first <= end) visit(z, first, end);
    }

    int n_;
    std::vector<long> lo_, hi_;
    std::vector<Facet> facets_;
};

std::string cap_message(double estimate, long cap, const char* what) {
    std::ostringstream os;
    os.precision(6);
    os << "packing " << what << " " << estimate
       << " cells (Vol(box)*exp(-t*sum d_i lambda_i)), exceeding max_cells=" << cap;
    return os.str();
}

void preflight(const PackingSpec& spec) {
    const double est = estimated_cells(spec);
    if (est > static_cast<double>(spec.max_cells)) throw CapExceeded(cap_message(est, spec.max_cells, "needs about"), est);
}

}  // namespace

double estimated_cells(const PackingSpec& spec) {
    return spec.box.volume() * std::exp(-spec.t * spec.a.trace());
}

std::vector<Cell> enumerate_packing(const PackingSpec& spec) {
    preflight(spec);
    const PackingGeometry geom(spec);
    std::vector<Cell> cells;
    geom.for_each_row([&](const std::vector<long>& prefix, long first, long end) {
        if (static_cast<double>(cells.size()) + static_cast<double>(end - first + 1) > static_cast<double>(spec.max_cells))
            throw CapExceeded(cap_message(estimated_cells(spec), spec.max_cells, "enumeration passed the cap; estimate"),
                              estimated_cells(spec));
        for (long v = first; v <= end; ++v) {
            Cell c = prefix;
            c.back() = v;
            cells.push_back(std::move(c));
        }
    });
    return cells;
}

long count_packing(const PackingSpec& spec) {
    preflight(spec);
    const PackingGeometry geom(spec);
    long count = 0;
    geom.for_each_row([&](const std::vector<long>&, long first, long end) {
        count += end - first + 1;
        if (count > spec.max_cells)
            throw CapExceeded(cap_message(estimated_cells(spec), spec.max_cells, "enumeration passed the cap; estimate"),
                              estimated_cells(spec));
    });
    return count;
}

TestFunction TestFunction::linear(Vec ell) {
    if (ell.size() < 1 || !ell.allFinite()) throw InvalidArgument("test function coefficients must be finite");
    if (ell.isZero(0.0)) throw InvalidArgument("test function coefficients must be nonzero");
    return TestFunction(std::move(ell));
}

TestFunction TestFunction::coordinate(int n, int index) {
    if (index < 0 || index >= n) throw InvalidArgument("coordinate index out of range");
    return TestFunction(Vec::Unit(n, index));
}

double oscillation(const MatrixSpec& a, double t, const TestFunction& u) {
    if (u.dim() != a.dim()) throw InvalidArgument("oscillation: test function dimension mismatch");
    const Vec row = mat_exp(a, t).matrix().transpose() * u.coefficients();
    return row.cwiseAbs().sum();
}

double variation_sum(const PackingSpec& spec, const TestFunction& u, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("variation_sum: Q must be >= 1");
    const long cells = count_packing(spec);
    return static_cast<double>(cells) * std::pow(oscillation(spec.a, spec.t, u), q);
}

std::string classify_slope(double slope) {
    if (slope < -0.1) return "diverging";
    if (slope > 0.1) return "vanishing";
    return "critical";
}

VariationReport fit_exponents(const MatrixSpec& a, const TestFunction& u, const Box& box,
                              const std::vector<double>& t_grid, const std::vector<double>& q_list, long max_cells) {
    if (t_grid.size() < 3) throw InvalidArgument("fit_exponents: need at least 3 grid points");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] < -1.0)) throw InvalidArgument("fit_exponents: every t must be < -1");
        if (i && !(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("fit_exponents: t grid must be strictly increasing");
    }
    if (q_list.empty()) throw InvalidArgument("fit_exponents: empty Q list");
    for (double q : q_list)
        if (!(q >= 1.0)) throw InvalidArgument("fit_exponents: every Q must be >= 1");

    const auto form = real_part_jordan_form(a);
    VariationReport report;
    std::vector<long> counts;
    std::vector<double> oscs;
    for (double t : t_grid) {
        const PackingSpec spec{a, t, box, max_cells};
        counts.push_back(count_packing(spec));
        oscs.push_back(oscillation(a, t, u));
    }
    for (double q : q_list) {
        std::vector<double> ys;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double v = static_cast<double>(counts[i]) * std::pow(oscs[i], q);
            report.rows.push_back({t_grid[i], q, counts[i], v, std::log(v)});
            ys.push_back(std::log(v));
        }
        const auto k = static_cast<double>(t_grid.size());
        double mt = 0, my = 0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            mt += t_grid[i];
            my += ys[i];
        }
        mt /= k;
        my /= k;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            sxx += (t_grid[i] - mt) * (t_grid[i] - mt);
            sxy += (t_grid[i] - mt) * (ys[i] - my);
        }
        const double slope = sxy / sxx;
        double ss = 0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double r = ys[i] - (my + slope * (t_grid[i] - mt));
            ss += r * r;
        }
        VariationFit fit;
        fit.q = q;
        fit.slope = slope;
        fit.predicted = q * form.lambda_max() - form.weighted_sum();
        fit.residual = std::sqrt(ss / k);
        fit.poly_exponent = (1.0 - a.dim()) * q;
        fit.classification = classify_slope(slope);
        report.fits.push_back(fit);
    }
    return report;
}

namespace {

std::string g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string VariationReport::rows_csv() const {
    std::string out = "t,Q,cells,V,log V\n";
    for (const auto& r : rows)
        out += g12(r.t) + "," + g12(r.q) + "," + std::to_string(r.cells) + "," + g12(r.value) + "," + g12(r.log_value) + "\n";
    return out;
}

std::string VariationReport::fits_csv() const {
    std::string out = "Q,slope,predicted,residual,classification\n";
    for (const auto& f : fits)
        out += g12(f.q) + "," + g12(f.slope) + "," + g12(f.predicted) + "," + g12(f.residual) + "," + f.classification + "\n";
    return out;
}

}  // namespace heintze

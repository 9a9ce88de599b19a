#pragma once

#include "heintze/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace heintze {

/// Closed axis-aligned box [lo, hi] in R^n with lo < hi componentwise.
struct Box {
    Vec lo;
    Vec hi;

    Box(Vec lo_, Vec hi_);
    static Box unit(int n);
    /// "lo1,hi1;lo2,hi2;..."
    static Box parse(std::string_view text);

    int dim() const noexcept { return static_cast<int>(lo.size()); }
    double volume() const;
    bool contains(const Box& inner) const;
};

inline constexpr long kDefaultMaxCells = 10'000'000;

/// Packing of `box` by the images e^{tA}(z + [0,1)^n), z in Z^n.
struct PackingSpec {
    MatrixSpec a;
    double t;
    Box box;
    long max_cells = kDefaultMaxCells;
};

using Cell = std::vector<long>;

/// Vol(box) * e^{-t trace A}: the number of unit cells in e^{-tA}(box).
double estimated_cells(const PackingSpec& spec);

/// All z with (z + [0,1)^n) meeting e^{-tA}(box), in lexicographic order.
/// Throws CapExceeded when the estimate or the actual count passes max_cells.
std::vector<Cell> enumerate_packing(const PackingSpec& spec);

/// Same set as enumerate_packing, counted without materializing cells.
long count_packing(const PackingSpec& spec);

/// Linear test function u(x) = ell . x.
class TestFunction {
public:
    static TestFunction linear(Vec ell);
    /// u(x) = x_index (0-based).
    static TestFunction coordinate(int n, int index);

    const Vec& coefficients() const noexcept { return ell_; }
    int dim() const noexcept { return static_cast<int>(ell_.size()); }

private:
    explicit TestFunction(Vec ell) : ell_(std::move(ell)) {}
    Vec ell_;
};

/// Oscillation of u over e^{tA}(z + cube): sum_i |(ell^T e^{tA})_i|, for every z.
double oscillation(const MatrixSpec& a, double t, const TestFunction& u);

/// Sum over packing cells of oscillation^Q, for Q >= 1.
double variation_sum(const PackingSpec& spec, const TestFunction& u, double q);

struct VariationRow {
    double t;
    double q;
    long cells;
    double value;
    double log_value;
};

struct VariationFit {
    double q;
    double slope;      // least-squares slope of log V against t
    double predicted;  // q*lambda_k - sum_i d_i lambda_i
    double residual;   // RMS residual of the fit
    /// Exponent (1-n)q of the |t| factor the regression ignores.
    double poly_exponent;
    std::string classification;  // "diverging", "vanishing" or "critical"
};

struct VariationReport {
    std::vector<VariationRow> rows;
    std::vector<VariationFit> fits;

    /// Header "t,Q,cells,V,log V"; 12 significant digits.
    std::string rows_csv() const;
    /// Header "Q,slope,predicted,residual,classification".
    std::string fits_csv() const;
};

/// Classification thresholds on the fitted slope.
std::string classify_slope(double slope);

/// Runs variation_sum over t_grid x q_list and fits log V against t per Q.
/// t_grid must be strictly increasing, below -1, with at least 3 points.
VariationReport fit_exponents(const MatrixSpec& a, const TestFunction& u, const Box& box,
                              const std::vector<double>& t_grid, const std::vector<double>& q_list,
                              long max_cells = kDefaultMaxCells);

}  // namespace heintze

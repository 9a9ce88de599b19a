#pragma once

#include "heintze/boundary.hpp"
#include "heintze/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace heintze {

/// Continuous piecewise-linear function on R given by knots (x_i, y_i) with
/// strictly increasing x_i. Beyond the end knots it continues with the slope
/// of the end segment; a single knot means a constant function.
class PiecewiseLinear {
public:
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);
    static PiecewiseLinear constant(double value) { return PiecewiseLinear({{0.0, value}}); }
    static PiecewiseLinear affine(double slope, double intercept) {
        return PiecewiseLinear({{0.0, intercept}, {1.0, intercept + slope}});
    }

    double operator()(double y) const;
    /// Largest absolute segment slope.
    double lipschitz() const;
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

    PiecewiseLinear scaled(double s) const;
    /// y -> f(a*y + b), a != 0.
    PiecewiseLinear precomposed(double a, double b) const;
    /// y -> f(y) + slope*y.
    PiecewiseLinear plus_linear(double slope) const;
    PiecewiseLinear operator+(const PiecewiseLinear& other) const;

private:
    std::vector<std::pair<double, double>> knots_;
};

class QSMap;

struct Translation {
    Vec v;
};

struct LinearMap {
    MatrixSpec m;
};

/// x -> (a_0 I + a_1 N + ... + a_{n-2} N^{n-2}) x + v + (C(x_n), 0, ..., 0).
struct JordanFamily {
    int n = 2;
    std::vector<double> a;  // a_0 != 0, at most n-1 entries
    Vec v;
    PiecewiseLinear c = PiecewiseLinear::constant(0.0);
};

/// x -> (a_0 I + a_1 N + ... + a_{n-1} N^{n-1}) x.
struct PolyNilpotent {
    int n = 2;
    std::vector<double> coeffs;  // a_0 != 0, at most n entries
};

/// x -> x + (C(x_n), 0, ..., 0).
struct Shear {
    int n = 2;
    PiecewiseLinear c = PiecewiseLinear::constant(0.0);
};

/// maps[0] o maps[1] o ... : the last map applies first.
struct Composition {
    std::vector<QSMap> maps;
};

/// Boundary self-map of R^n with serializable parameters.
class QSMap {
public:
    using Variant = std::variant<Translation, LinearMap, JordanFamily, PolyNilpotent, Shear, Composition>;

    QSMap(Variant v);  // validates

    static QSMap from_json(std::string_view text);
    std::string to_json() const;

    const Variant& variant() const noexcept { return v_; }
    std::string kind() const;
    int dim() const;

    Vec operator()(const Vec& x) const;

private:
    Variant v_;
};

inline Vec eval(const QSMap& map, const Vec& x) { return map(x); }

/// F o G for two Jordan-family maps of the same dimension, again in Jordan-family form.
JordanFamily compose(const JordanFamily& f, const JordanFamily& g);

/// Multiplicative distortion bound e^a of the shear x -> x + (C(x_n),0,..,0) on
/// (R^n, D_{J_n}) for L-Lipschitz C: a is the largest u >= 0 with
/// e^u <= (1+L) sqrt(Q(e^{uN})), Q the sum of squared entries.
double shear_bilip_bound(int n, double lipschitz);

/// Distortion bound for x -> (sum a_k N^k) x: e^{max(a, a')} where a solves
/// e^u <= sqrt(Q(e^{uN}) Q(B)) and a' the same with B^{-1}.
double poly_bilip_bound(int n, const std::vector<double>& coeffs);

/// Coefficients of (sum a_k N^k)^{-1} from the finite Neumann series.
std::vector<double> poly_inverse(int n, const std::vector<double>& coeffs);

/// Theoretical biLipschitz bound for the map on (R^n, D_{J_n}) when one is
/// known (translations, shears, nilpotent polynomials, Jordan families and
/// compositions of these).
std::optional<double> theoretical_bound(const QSMap& map);

struct RatioRange {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    int pairs = 0;
};

/// Extremes of D(Fx, Fy)/D(x, y) over pairs sampled in [-box_radius, box_radius]^n.
RatioRange empirical_bilip(const QSMap& map, const BoundarySpace& space, int samples, std::uint64_t seed,
                           double box_radius = 1.0);

/// Extremes of D_B(Mx, My)/D_A(x, y)^s over sampled pairs.
RatioRange transfer_check(const BoundarySpace& a, const BoundarySpace& b, const MatrixSpec& m, double s, int samples,
                          std::uint64_t seed, double box_radius = 1.0);

struct DistortionRow {
    double r = 0;
    double upper = 0;  // L_F(x, r): max D(Fx, Fx') over D(x, x') in [0.9r, r]
    double lower = 0;  // l_F(x, r): min D(Fx, Fx') over D(x, x') in [r, 1.1r]
    int upper_hits = 0;
    int lower_hits = 0;
    bool missed() const { return upper_hits == 0 || lower_hits == 0; }
};

struct DistortionReport {
    std::vector<DistortionRow> rows;
    std::string csv() const;  // r,L,l,L/r,l/r,upper_hits,lower_hits
};

/// Samples x' in each annulus exactly by dilating random directions:
/// x' = x + e^{sA} w with s chosen so that D(x, x') hits the drawn radius.
DistortionReport distortion_profile(const QSMap& map, const BoundarySpace& space, const Vec& x,
                                    const std::vector<double>& radii, int samples_per_radius, std::uint64_t seed);

struct ProbeRow {
    double t = 0;
    /// |e^{-tN}(F(x) - F(o))| / e^t: horospherical stretch at the height of (o, x).
    double stretch = 0;
    /// D(F(o), F(x)) / D(o, x) = e^{s-t}.
    double distortion = 0;
};

struct ConformalProbe {
    std::vector<ProbeRow> rows;
    std::string csv() const;  // t,stretch,distortion
};

/// Probes F on (R^n, D_{J_n}) along x = o + e^{tN}(0, ..., 0, e^t), which has
/// D_{J_n}(o, x) = e^t. As t -> -inf the stretch tends to sqrt(1 + C'(0)^2)
/// for a shear with C differentiable at o_n.
ConformalProbe conformal_probe(const QSMap& map, const Vec& origin, const std::vector<double>& heights,
                               const SolverConfig& solver = {});

struct QSProfile {
    std::vector<std::pair<double, double>> samples;   // (input ratio, output ratio)
    std::vector<std::pair<double, double>> envelope;  // sorted input ratio, running max of output
    int skipped = 0;

    /// Empirical eta(t): the envelope value at the largest sampled ratio <= t (0 below all samples).
    double eta(double t) const;
};

/// Ratio pairs D(x,y)/D(x,z) -> D(Fx,Fy)/D(Fx,Fz) from sampled triples.
QSProfile qs_profile(const QSMap& map, const BoundarySpace& space, int triples, std::uint64_t seed,
                     double box_radius = 1.0);

}  // namespace heintze

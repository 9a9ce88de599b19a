#include "heintze/maps.hpp"

#include "heintze/error.hpp"
#include "heintze/sampling.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace heintze {

using Json = nlohmann::json;

// ---------------------------------------------------------------- PiecewiseLinear

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw InvalidArgument("piecewise-linear function needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i].first) || !std::isfinite(knots_[i].second))
            throw InvalidArgument("piecewise-linear knots must be finite");
        if (i && !(knots_[i].first > knots_[i - 1].first))
            throw InvalidArgument("piecewise-linear knots must have strictly increasing x");
    }
}

double PiecewiseLinear::operator()(double y) const {
    if (knots_.size() == 1) return knots_.front().second;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), y,
                               [](double v, const std::pair<double, double>& k) { return v < k.first; });
    std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    hi = std::clamp<std::size_t>(hi, 1, knots_.size() - 1);
    const auto& [x0, y0] = knots_[hi - 1];
    const auto& [x1, y1] = knots_[hi];
    return y0 + (y1 - y0) * ((y - x0) / (x1 - x0));
}

double PiecewiseLinear::lipschitz() const {
    double l = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i)
        l = std::max(l, std::abs((knots_[i].second - knots_[i - 1].second) / (knots_[i].first - knots_[i - 1].first)));
    return l;
}

PiecewiseLinear PiecewiseLinear::scaled(double s) const {
    auto k = knots_;
    for (auto& [x, y] : k) y *= s;
    return PiecewiseLinear(std::move(k));
}

PiecewiseLinear PiecewiseLinear::precomposed(double a, double b) const {
    if (a == 0.0 || !std::isfinite(a)) throw InvalidArgument("precomposed: scale must be nonzero");
    auto k = knots_;
    for (auto& [x, y] : k) x = (x - b) / a;
    if (a < 0) std::reverse(k.begin(), k.end());
    return PiecewiseLinear(std::move(k));
}

PiecewiseLinear PiecewiseLinear::plus_linear(double slope) const {
    auto k = knots_;
    if (k.size() == 1) k.emplace_back(k.front().first + 1.0, k.front().second);
    for (auto& [x, y] : k) y += slope * x;
    return PiecewiseLinear(std::move(k));
}

PiecewiseLinear PiecewiseLinear::operator+(const PiecewiseLinear& other) const {
    std::vector<double> xs;
    for (const auto& k : knots_) xs.push_back(k.first);
    for (const auto& k : other.knots_) xs.push_back(k.first);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<std::pair<double, double>> k;
    for (double x : xs) k.emplace_back(x, (*this)(x) + other(x));
    // both constant with different knot positions: one knot suffices
    if (knots_.size() == 1 && other.knots_.size() == 1) k.resize(1);
    return PiecewiseLinear(std::move(k));
}

// ---------------------------------------------------------------- QSMap

namespace {

// (sum a_k N^k) x for x in R^n: component i gets sum_k a_k x_{i+k}.
Vec apply_poly(const std::vector<double>& coeffs, const Vec& x) {
    const auto n = x.size();
    Vec out = Vec::Zero(n);
    for (std::size_t k = 0; k < coeffs.size() && static_cast<Eigen::Index>(k) < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out.head(n - kk) += coeffs[k] * x.tail(n - kk);
    }
    return out;
}

void require_dim(int expected, const Vec& x) {
    if (x.size() != expected)
        throw InvalidArgument("map expects " + std::to_string(expected) + " coordinates, got " + std::to_string(x.size()));
}

struct Validator {
    void operator()(const Translation& m) const {
        if (m.v.size() < 1 || !m.v.allFinite()) throw InvalidArgument("translation: v must be finite and nonempty");
    }
    void operator()(const LinearMap&) const {}
    void operator()(const JordanFamily& m) const {
        if (m.n < 2) throw InvalidArgument("jordan_family: n must be >= 2");
        if (m.a.empty() || static_cast<int>(m.a.size()) > m.n - 1)
            throw InvalidArgument("jordan_family: need 1..n-1 coefficients a_0..a_{n-2}");
        if (m.a.front() == 0.0) throw InvalidArgument("jordan_family: a_0 must be nonzero");
        for (double c : m.a)
            if (!std::isfinite(c)) throw InvalidArgument("jordan_family: coefficients must be finite");
        if (m.v.size() != m.n || !m.v.allFinite()) throw InvalidArgument("jordan_family: v must have n finite entries");
    }
    void operator()(const PolyNilpotent& m) const {
        if (m.n < 1) throw InvalidArgument("poly_nilpotent: n must be >= 1");
        if (m.coeffs.empty() || static_cast<int>(m.coeffs.size()) > m.n)
            throw InvalidArgument("poly_nilpotent: need 1..n coefficients");
        if (m.coeffs.front() == 0.0) throw InvalidArgument("poly_nilpotent: a_0 must be nonzero");
    }
    void operator()(const Shear& m) const {
        if (m.n < 1) throw InvalidArgument("shear: n must be >= 1");
    }
    void operator()(const Composition& m) const {
        if (m.maps.empty()) throw InvalidArgument("composition: needs at least one map");
        const int n = m.maps.front().dim();
        for (const auto& f : m.maps)
            if (f.dim() != n) throw InvalidArgument("composition: maps have different dimensions");
    }
};

struct Dim {
    int operator()(const Translation& m) const { return static_cast<int>(m.v.size()); }
    int operator()(const LinearMap& m) const { return m.m.dim(); }
    int operator()(const JordanFamily& m) const { return m.n; }
    int operator()(const PolyNilpotent& m) const { return m.n; }
    int operator()(const Shear& m) const { return m.n; }
    int operator()(const Composition& m) const { return m.maps.front().dim(); }
};

struct Evaluator {
    const Vec& x;
    Vec operator()(const Translation& m) const { return x + m.v; }
    Vec operator()(const LinearMap& m) const { return m.m.matrix() * x; }
    Vec operator()(const JordanFamily& m) const {
        Vec y = apply_poly(m.a, x) + m.v;
        y(0) += m.c(x(m.n - 1));
        return y;
    }
    Vec operator()(const PolyNilpotent& m) const { return apply_poly(m.coeffs, x); }
    Vec operator()(const Shear& m) const {
        Vec y = x;
        y(0) += m.c(x(m.n - 1));
        return y;
    }
    Vec operator()(const Composition& m) const {
        Vec y = x;
        for (auto it = m.maps.rbegin(); it != m.maps.rend(); ++it) y = (*it)(y);
        return y;
    }
};

std::vector<double> to_doubles(const Json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw ParseError(std::string(what) + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Vec to_vec(const Json& j, const char* what) {
    auto d = to_doubles(j, what);
    return Eigen::Map<Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
}

const Json& field(const Json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("map object is missing \"") + key + "\"");
    return j.at(key);
}

PiecewiseLinear pl_from_json(const Json& j) {
    const auto& knots = field(j, "knots");
    if (!knots.is_array()) throw ParseError("\"knots\" must be an array of [x, y] pairs");
    std::vector<std::pair<double, double>> k;
    for (const auto& p : knots) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ParseError("each knot must be an [x, y] pair of numbers");
        k.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return PiecewiseLinear(std::move(k));
}

Json pl_to_json(const PiecewiseLinear& c) {
    Json knots = Json::array();
    for (const auto& [x, y] : c.knots()) knots.push_back(Json::array({x, y}));
    return Json{{"knots", knots}};
}

int int_field(const Json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) throw ParseError(std::string("\"") + key + "\" must be an integer");
    return v.get<int>();
}

QSMap map_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("map must be a JSON object");
    const auto& kind_field = field(j, "kind");
    if (!kind_field.is_string()) throw ParseError("\"kind\" must be a string");
    const std::string kind = kind_field.get<std::string>();
    try {
        if (kind == "translation") return QSMap(Translation{to_vec(field(j, "v"), "v")});
        if (kind == "linear") {
            const auto& rows = field(j, "rows");
            if (!rows.is_array()) throw ParseError("\"rows\" must be an array");
            std::vector<std::vector<double>> r;
            for (const auto& row : rows) r.push_back(to_doubles(row, "matrix row"));
            return QSMap(LinearMap{MatrixSpec::from_rows(r)});
        }
        if (kind == "jordan_family") {
            JordanFamily m;
            m.n = int_field(j, "n");
            m.a = to_doubles(field(j, "a"), "a");
            m.v = j.contains("v") ? to_vec(j.at("v"), "v") : Vec(Vec::Zero(std::max(m.n, 1)));
            m.c = j.contains("C") ? pl_from_json(j.at("C")) : PiecewiseLinear::constant(0.0);
            return QSMap(std::move(m));
        }
        if (kind == "poly_nilpotent") {
            return QSMap(PolyNilpotent{int_field(j, "n"), to_doubles(field(j, "coeffs"), "coeffs")});
        }
        if (kind == "shear") return QSMap(Shear{int_field(j, "n"), pl_from_json(field(j, "C"))});
        if (kind == "composition") {
            const auto& maps = field(j, "maps");
            if (!maps.is_array()) throw ParseError("\"maps\" must be an array");
            Composition c;
            for (const auto& m : maps) c.maps.push_back(map_from_json(m));
            return QSMap(std::move(c));
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown map kind \"" + kind + "\"");
}

Json map_to_json(const QSMap& map) {
    return std::visit(
        [](const auto& m) -> Json {
            using T = std::decay_t<decltype(m)>;
            auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
            if constexpr (std::is_same_v<T, Translation>) {
                return Json{{"kind", "translation"}, {"v", vec(m.v)}};
            } else if constexpr (std::is_same_v<T, LinearMap>) {
                return Json{{"kind", "linear"}, {"rows", m.m.rows()}};
            } else if constexpr (std::is_same_v<T, JordanFamily>) {
                return Json{{"kind", "jordan_family"}, {"n", m.n}, {"a", m.a}, {"v", vec(m.v)}, {"C", pl_to_json(m.c)}};
            } else if constexpr (std::is_same_v<T, PolyNilpotent>) {
                return Json{{"kind", "poly_nilpotent"}, {"n", m.n}, {"coeffs", m.coeffs}};
            } else if constexpr (std::is_same_v<T, Shear>) {
                return Json{{"kind", "shear"}, {"n", m.n}, {"C", pl_to_json(m.c)}};
            } else {
                Json maps = Json::array();
                for (const auto& f : m.maps) maps.push_back(map_to_json(f));
                return Json{{"kind", "composition"}, {"maps", maps}};
            }
        },
        map.variant());
}

}  // namespace

QSMap::QSMap(Variant v) : v_(std::move(v)) { std::visit(Validator{}, v_); }

QSMap QSMap::from_json(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("map JSON syntax error: ") + e.what());
    }
    return map_from_json(doc);
}

std::string QSMap::to_json() const { return map_to_json(*this).dump(); }

std::string QSMap::kind() const {
    static constexpr const char* names[] = {"translation", "linear", "jordan_family", "poly_nilpotent", "shear",
                                            "composition"};
    return names[v_.index()];
}

int QSMap::dim() const { return std::visit(Dim{}, v_); }

Vec QSMap::operator()(const Vec& x) const {
    require_dim(dim(), x);
    return std::visit(Evaluator{x}, v_);
}

// ---------------------------------------------------------------- algebra

namespace {

// Coefficients of the product of two polynomials in N, truncated at degree n-1.
std::vector<double> poly_product(int n, const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size() && i + j < out.size(); ++j) out[i + j] += p[i] * q[j];
    return out;
}

}  // namespace

JordanFamily compose(const JordanFamily& f, const JordanFamily& g) {
    if (f.n != g.n) throw InvalidArgument("compose: dimension mismatch");
    const int n = f.n;
    // F(G x) = B B' x + B v' + v + e_1 [a_0 C'(x_n) + C(a'_0 x_n + v'_n)];
    // the N^{n-1} term of B B' acts as x_n e_1 and joins the C part.
    auto prod = poly_product(n, f.a, g.a);
    const double top = prod.back();
    prod.pop_back();
    while (prod.size() > 1 && prod.back() == 0.0) prod.pop_back();

    JordanFamily out;
    out.n = n;
    out.a = std::move(prod);
    out.v = apply_poly(f.a, g.v) + f.v;
    const double a0 = f.a.front();
    out.c = g.c.scaled(a0) + f.c.precomposed(g.a.front(), g.v(n - 1));
    if (top != 0.0) out.c = out.c.plus_linear(top);
    return out;
}

namespace {

// Q(e^{uN}) = sum_k (n-k) (u^k/k!)^2.
double q_exp_nilpotent(int n, double u) {
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k) term *= u / k;
        sum += (n - k) * term * term;
    }
    return sum;
}

double q_poly(int n, const std::vector<double>& coeffs) {
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size() && static_cast<int>(k) < n; ++k)
        s += (n - static_cast<double>(k)) * coeffs[k] * coeffs[k];
    return s;
}

// Largest u with h(u) <= 0 where h(u) = u - log(c) - 0.5 log Q(e^{uN}).
// For u >= max(n-1, 1), h(u) >= u - log c - 1.5 log n - (n-1) log u, which
// increases in u; once that minorant is positive no zero lies further right.
double largest_root(int n, double log_c) {
    auto h = [&](double u) { return u - log_c - 0.5 * std::log(q_exp_nilpotent(n, u)); };
    auto minorant = [&](double u) {
        return u - log_c - 1.5 * std::log(static_cast<double>(n)) - (n - 1) * std::log(std::max(1.0, u));
    };
    double upper = std::max(1.0, n - 1.0);
    while (minorant(upper) <= 0) upper *= 2.0;
    // h(u) <= u - log c - 0.5 log n, so h <= 0 at this lower end
    const double lower = std::min(0.0, log_c + 0.5 * std::log(static_cast<double>(n)));
    constexpr double kStep = 1e-3;
    double hi = upper;
    double lo = hi - kStep;
    while (h(lo) > 0) {
        hi = lo;
        lo -= kStep;
        if (lo < lower - kStep) throw SolverError("bound root search fell below its certified lower end");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) <= 0 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

double shear_bilip_bound(int n, double lipschitz) {
    if (n < 1) throw InvalidArgument("shear_bilip_bound: n must be >= 1");
    if (!(lipschitz >= 0) || !std::isfinite(lipschitz)) throw InvalidArgument("shear_bilip_bound: L must be >= 0");
    if (n == 1) return 1.0;
    return std::exp(std::max(0.0, largest_root(n, std::log1p(lipschitz))));
}

std::vector<double> poly_inverse(int n, const std::vector<double>& coeffs) {
    if (coeffs.empty() || coeffs.front() == 0.0) throw InvalidArgument("poly_inverse: a_0 must be nonzero");
    const double a0 = coeffs.front();
    // B = a_0 (I - beta), beta = -(a_1/a_0 N + ...), beta^n = 0
    std::vector<double> beta(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 1; k < coeffs.size() && static_cast<int>(k) < n; ++k) beta[k] = -coeffs[k] / a0;
    std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> power(static_cast<std::size_t>(n), 0.0);
    power[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] += power[static_cast<std::size_t>(i)];
        power = poly_product(n, power, beta);
    }
    for (auto& c : sum) c /= a0;
    return sum;
}

double poly_bilip_bound(int n, const std::vector<double>& coeffs) {
    if (n < 1) throw InvalidArgument("poly_bilip_bound: n must be >= 1");
    if (coeffs.empty() || static_cast<int>(coeffs.size()) > n) throw InvalidArgument("poly_bilip_bound: need 1..n coefficients");
    if (coeffs.front() == 0.0) throw InvalidArgument("poly_bilip_bound: a_0 must be nonzero");
    const double a = largest_root(n, 0.5 * std::log(q_poly(n, coeffs)));
    const double a_inv = largest_root(n, 0.5 * std::log(q_poly(n, poly_inverse(n, coeffs))));
    return std::exp(std::max(a, a_inv));
}

std::optional<double> theoretical_bound(const QSMap& map) {
    return std::visit(
        [](const auto& m) -> std::optional<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Translation>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, LinearMap>) {
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, JordanFamily>) {
                // F = translate o shear(C(./a_0)) o poly(a_0, ..., a_{n-2}, 0)
                const double a0 = std::abs(m.a.front());
                return shear_bilip_bound(m.n, m.c.lipschitz() / a0) * poly_bilip_bound(m.n, m.a);
            } else if constexpr (std::is_same_v<T, PolyNilpotent>) {
                return poly_bilip_bound(m.n, m.coeffs);
            } else if constexpr (std::is_same_v<T, Shear>) {
                return shear_bilip_bound(m.n, m.c.lipschitz());
            } else {
                double product = 1.0;
                for (const auto& f : m.maps) {
                    const auto b = theoretical_bound(f);
                    if (!b) return std::nullopt;
                    product *= *b;
                }
                return product;
            }
        },
        map.variant());
}

// ---------------------------------------------------------------- estimators

RatioRange empirical_bilip(const QSMap& map, const BoundarySpace& space, int samples, std::uint64_t seed,
                           double box_radius) {
    if (map.dim() != space.dim()) throw InvalidArgument("empirical_bilip: map and space dimensions differ");
    if (samples < 1) throw InvalidArgument("empirical_bilip: samples must be >= 1");
    Sampler rng(seed);
    RatioRange out{std::numeric_limits<double>::infinity(), 0.0, 0};
    for (int i = 0; i < samples; ++i) {
        const Vec x = rng.cube(space.dim(), box_radius);
        const Vec y = rng.cube(space.dim(), box_radius);
        const double d = space.dist(x, y);
        if (d == 0.0) continue;
        const double r = space.dist(map(x), map(y)) / d;
        out.min_ratio = std::min(out.min_ratio, r);
        out.max_ratio = std::max(out.max_ratio, r);
        ++out.pairs;
    }
    return out;
}

RatioRange transfer_check(const BoundarySpace& a, const BoundarySpace& b, const MatrixSpec& m, double s, int samples,
                          std::uint64_t seed, double box_radius) {
    if (a.dim() != b.dim() || m.dim() != a.dim()) throw InvalidArgument("transfer_check: dimension mismatch");
    if (!(s > 0)) throw InvalidArgument("transfer_check: s must be > 0");
    if (samples < 1) throw InvalidArgument("transfer_check: samples must be >= 1");
    const Eigen::FullPivLU<Mat> lu(m.matrix());
    if (!lu.isInvertible()) throw InvalidArgument("transfer_check: M is singular");
    Sampler rng(seed);
    RatioRange out{std::numeric_limits<double>::infinity(), 0.0, 0};
    for (int i = 0; i < samples; ++i) {
        const Vec x = rng.cube(a.dim(), box_radius);
        const Vec y = rng.cube(a.dim(), box_radius);
        const double d = a.dist(x, y);
        if (d == 0.0) continue;
        const double r = b.dist(m.matrix() * x, m.matrix() * y) / std::pow(d, s);
        out.min_ratio = std::min(out.min_ratio, r);
        out.max_ratio = std::max(out.max_ratio, r);
        ++out.pairs;
    }
    return out;
}

namespace {

std::string g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

DistortionReport distortion_profile(const QSMap& map, const BoundarySpace& space, const Vec& x,
                                    const std::vector<double>& radii, int samples_per_radius, std::uint64_t seed) {
    if (map.dim() != space.dim() || x.size() != space.dim())
        throw InvalidArgument("distortion_profile: dimension mismatch");
    if (samples_per_radius < 1) throw InvalidArgument("distortion_profile: samples_per_radius must be >= 1");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0)) throw InvalidArgument("distortion_profile: radii must be positive");
        if (i && !(radii[i] < radii[i - 1])) throw InvalidArgument("distortion_profile: radii must be decreasing");
    }
    Sampler rng(seed);
    const int n = space.dim();
    const Vec origin = Vec::Zero(n);
    const Vec fx = map(x);
    // x' at distance rho: e^{sA} is a similarity with factor e^s
    auto point_at = [&](double rho) {
        Vec w = rng.direction(n);
        const double d = space.dist(origin, w);
        apply_exp(space.matrix().matrix(), std::log(rho / d), w);
        return Vec(x + w);
    };
    DistortionReport report;
    for (double r : radii) {
        DistortionRow row;
        row.r = r;
        row.lower = std::numeric_limits<double>::infinity();
        for (int k = 0; k < samples_per_radius; ++k) {
            const Vec xu = point_at(rng.uniform(0.9 * r, r));
            const double du = space.dist(x, xu);
            if (du >= 0.9 * r * (1 - 1e-9) && du <= r * (1 + 1e-9)) {
                row.upper = std::max(row.upper, space.dist(fx, map(xu)));
                ++row.upper_hits;
            }
            const Vec xl = point_at(rng.uniform(r, 1.1 * r));
            const double dl = space.dist(x, xl);
            if (dl >= r * (1 - 1e-9) && dl <= 1.1 * r * (1 + 1e-9)) {
                row.lower = std::min(row.lower, space.dist(fx, map(xl)));
                ++row.lower_hits;
            }
        }
        if (row.lower_hits == 0) row.lower = 0.0;
        report.rows.push_back(row);
    }
    return report;
}

std::string DistortionReport::csv() const {
    std::string out = "r,L,l,L/r,l/r,upper_hits,lower_hits\n";
    for (const auto& row : rows)
        out += g12(row.r) + "," + g12(row.upper) + "," + g12(row.lower) + "," + g12(row.upper / row.r) + "," +
               g12(row.lower / row.r) + "," + std::to_string(row.upper_hits) + "," + std::to_string(row.lower_hits) +
               "\n";
    return out;
}

ConformalProbe conformal_probe(const QSMap& map, const Vec& origin, const std::vector<double>& heights,
                               const SolverConfig& solver) {
    const int n = map.dim();
    if (n < 2) throw InvalidArgument("conformal_probe: needs n >= 2");
    if (origin.size() != n) throw InvalidArgument("conformal_probe: origin dimension mismatch");
    const BoundarySpace space(MatrixSpec::jordan_block(n), solver);
    const Vec fo = map(origin);
    ConformalProbe probe;
    for (double t : heights) {
        // e^{-tN}(x - o) = (0, ..., 0, e^t)
        const Vec offset = nilpotent_exp(n, t).matrix().col(n - 1) * std::exp(t);
        const Vec x = origin + offset;
        const Vec fx = map(x);
        ProbeRow row;
        row.t = t;
        row.stretch = (nilpotent_exp(n, -t).matrix() * (fx - fo)).norm() / std::exp(t);
        row.distortion = space.dist(fo, fx) / space.dist(origin, x);
        probe.rows.push_back(row);
    }
    return probe;
}

std::string ConformalProbe::csv() const {
    std::string out = "t,stretch,distortion\n";
    for (const auto& r : rows) out += g12(r.t) + "," + g12(r.stretch) + "," + g12(r.distortion) + "\n";
    return out;
}

double QSProfile::eta(double t) const {
    auto it = std::upper_bound(envelope.begin(), envelope.end(), t,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    if (it == envelope.begin()) return 0.0;
    return std::prev(it)->second;
}

QSProfile qs_profile(const QSMap& map, const BoundarySpace& space, int triples, std::uint64_t seed,
                     double box_radius) {
    if (map.dim() != space.dim()) throw InvalidArgument("qs_profile: dimension mismatch");
    if (triples < 1) throw InvalidArgument("qs_profile: triples must be >= 1");
    Sampler rng(seed);
    QSProfile out;
    const int n = space.dim();
    for (int i = 0; i < triples; ++i) {
        const Vec x = rng.cube(n, box_radius);
        const Vec y = rng.cube(n, box_radius);
        const Vec z = rng.cube(n, box_radius);
        const double dxy = space.dist(x, y), dxz = space.dist(x, z);
        if (dxy == 0.0 || dxz == 0.0) {
            ++out.skipped;
            continue;
        }
        const Vec fx = map(x);
        const double fxy = space.dist(fx, map(y)), fxz = space.dist(fx, map(z));
        if (fxz == 0.0) {
            ++out.skipped;
            continue;
        }
        out.samples.emplace_back(dxy / dxz, fxy / fxz);
    }
    auto sorted = out.samples;
    std::sort(sorted.begin(), sorted.end());
    double running = 0.0;
    for (const auto& [in, o] : sorted) {
        running = std::max(running, o);
        out.envelope.emplace_back(in, running);
    }
    return out;
}

}  // namespace heintze

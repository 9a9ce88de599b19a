#include "heintze/linalg.hpp"

#include "heintze/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace heintze {

MatrixSpec::MatrixSpec(Mat entries) : m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        std::ostringstream os;
        os << "matrix must be square with n >= 1, got " << m_.rows() << "x" << m_.cols();
        throw InvalidArgument(os.str());
    }
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        for (Eigen::Index j = 0; j < m_.cols(); ++j) {
            if (!std::isfinite(m_(i, j))) {
                std::ostringstream os;
                os << "non-finite matrix entry at row " << i + 1 << ", column " << j + 1;
                throw InvalidArgument(os.str());
            }
        }
    }
}

MatrixSpec MatrixSpec::from_rows(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw InvalidArgument("matrix has no rows");
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) {
            std::ostringstream os;
            os << "row " << i + 1 << " has " << row.size() << " entries, expected " << n;
            throw InvalidArgument(os.str());
        }
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return MatrixSpec(std::move(m));
}

MatrixSpec MatrixSpec::identity(int n) {
    if (n < 1) throw InvalidArgument("dimension must be >= 1");
    return MatrixSpec(Mat::Identity(n, n));
}

MatrixSpec MatrixSpec::diagonal(const std::vector<double>& diag) {
    if (diag.empty()) throw InvalidArgument("dimension must be >= 1");
    Vec d = Eigen::Map<const Vec>(diag.data(), static_cast<Eigen::Index>(diag.size()));
    return MatrixSpec(Mat(d.asDiagonal()));
}

MatrixSpec MatrixSpec::jordan_block(int n, double lambda) {
    if (n < 1) throw InvalidArgument("dimension must be >= 1");
    Mat m = lambda * Mat::Identity(n, n);
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = 1.0;
    return MatrixSpec(std::move(m));
}

MatrixSpec MatrixSpec::nilpotent_shift(int n) { return jordan_block(n, 0.0); }

MatrixSpec MatrixSpec::block_diagonal(const std::vector<MatrixSpec>& blocks) {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.dim();
    if (n == 0) throw InvalidArgument("block_diagonal needs at least one block");
    Mat m = Mat::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        m.block(off, off, b.dim(), b.dim()) = b.matrix();
        off += b.dim();
    }
    return MatrixSpec(std::move(m));
}

std::vector<std::vector<double>> MatrixSpec::rows() const {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(dim()));
    for (int i = 0; i < dim(); ++i) {
        out[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(dim()));
        for (int j = 0; j < dim(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m_(i, j);
    }
    return out;
}

namespace {

// Higham (2005) backward-error thresholds and Pade numerator coefficients.
constexpr std::array<double, 4> kTheta{1.495585217958292e-2, 2.539398330063230e-1,
                                       9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

constexpr std::array<double, 4> kB3{120., 60., 12., 1.};
constexpr std::array<double, 6> kB5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
constexpr std::array<double, 10> kB9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                     2162160.,     110880.,      3960.,        90.,        1.};
constexpr std::array<double, 14> kB13{64764752532480000., 32382376266240000., 7771770303897600.,
                                      1187353796428800.,  129060195264000.,   10559470521600.,
                                      670442572800.,      33522128640.,       1323241920.,
                                      40840800.,          960960.,            16380.,
                                      182.,               1.};

template <std::size_t K>
Mat pade_low(const Mat& a, const std::array<double, K>& b) {
    const auto n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    Mat u = b[1] * id;
    Mat v = b[0] * id;
    Mat p = id;
    for (std::size_t k = 2; k < K; k += 2) {
        p = p * a2;
        v += b[k] * p;
        if (k + 1 < K) u += b[k + 1] * p;
    }
    u = a * u;
    return (v - u).partialPivLu().solve(v + u);
}

Mat pade13(const Mat& a) {
    const auto n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const auto& b = kB13;
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Mat expm(const Mat& x) {
    const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) throw RangeError("matrix exponential of a non-finite matrix");
    if (norm1 <= kTheta[0]) return pade_low(x, kB3);
    if (norm1 <= kTheta[1]) return pade_low(x, kB5);
    if (norm1 <= kTheta[2]) return pade_low(x, kB7);
    if (norm1 <= kTheta[3]) return pade_low(x, kB9);
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
    Mat r = pade13(x / std::ldexp(1.0, s));
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

MatrixSpec mat_exp(const MatrixSpec& a, double t, const ExpOptions& opts) {
    if (!std::isfinite(t)) throw InvalidArgument("mat_exp: non-finite t");
    const double arg = std::abs(t) * operator_norm(a.matrix());
    if (arg > opts.overflow_guard) {
        std::ostringstream os;
        os << "mat_exp: |t|*||A|| = " << arg << " exceeds the overflow guard " << opts.overflow_guard;
        throw RangeError(os.str());
    }
    if (t == 0.0) return MatrixSpec::identity(a.dim());
    return MatrixSpec(expm(t * a.matrix()));
}

MatrixSpec nilpotent_exp(int n, double t) {
    if (n < 1) throw InvalidArgument("nilpotent_exp: n must be >= 1");
    if (!std::isfinite(t)) throw InvalidArgument("nilpotent_exp: non-finite t");
    // term[k] = t^k / k!, built by the same recurrence for every diagonal
    std::vector<double> term(static_cast<std::size_t>(n));
    term[0] = 1.0;
    for (int k = 1; k < n; ++k) term[static_cast<std::size_t>(k)] = term[static_cast<std::size_t>(k - 1)] * t / k;
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = term[static_cast<std::size_t>(j - i)];
    return MatrixSpec(std::move(m));
}

double frob_sq(const Mat& m) { return m.squaredNorm(); }

double operator_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

int numerical_rank(const MatrixSpec& m, double tol) {
    if (!(tol > 0)) throw InvalidArgument("numerical_rank: tol must be > 0");
    Eigen::JacobiSVD<Mat> svd(m.matrix());
    const Vec& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    const double threshold = tol * s(0);
    return static_cast<int>((s.array() > threshold).count());
}

int rank_above(const Eigen::MatrixXcd& m, double threshold) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return static_cast<int>((svd.singularValues().array() > threshold).count());
}

void apply_exp(const Mat& a, double delta, Vec& w) {
    if (delta == 0.0) return;
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff() * std::abs(delta);
    const int substeps = norm <= 1.0 ? 1 : static_cast<int>(std::ceil(norm));
    const double h = delta / substeps;
    Vec term(w.size());
    for (int s = 0; s < substeps; ++s) {
        Vec sum = w;
        term = w;
        for (int k = 1; k < 60; ++k) {
            term = (h / k) * (a * term);
            sum += term;
            if (term.lpNorm<Eigen::Infinity>() <= 1e-18 * sum.lpNorm<Eigen::Infinity>()) break;
        }
        w = sum;
    }
}

}  // namespace heintze

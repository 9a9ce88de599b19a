#pragma once

#include <Eigen/Dense>

#include <vector>

namespace heintze {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Square real matrix with finite entries and dimension n >= 1.
///
/// This is the generator A of the action t -> e^{tA} on R^n. Construction
/// validates; a MatrixSpec in hand is always usable.
class MatrixSpec {
public:
    explicit MatrixSpec(Mat entries);

    static MatrixSpec from_rows(const std::vector<std::vector<double>>& rows);
    static MatrixSpec identity(int n);
    static MatrixSpec diagonal(const std::vector<double>& diag);
    /// Jordan block lambda*I_n + N.
    static MatrixSpec jordan_block(int n, double lambda = 1.0);
    /// The nilpotent shift N: ones on the superdiagonal.
    static MatrixSpec nilpotent_shift(int n);
    static MatrixSpec block_diagonal(const std::vector<MatrixSpec>& blocks);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const Mat& matrix() const noexcept { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    double trace() const { return m_.trace(); }
    MatrixSpec scaled(double s) const { return MatrixSpec(s * m_); }
    std::vector<std::vector<double>> rows() const;

    friend bool operator==(const MatrixSpec& a, const MatrixSpec& b) { return a.m_ == b.m_; }

private:
    Mat m_;
};

struct ExpOptions {
    /// Largest accepted |t|·||A||_2; beyond it mat_exp throws RangeError.
    double overflow_guard = 50.0;
};

/// e^{tA} by Pade-13 scaling and squaring.
MatrixSpec mat_exp(const MatrixSpec& a, double t, const ExpOptions& opts = {});

/// e^{X} without a range guard. Callers are responsible for the argument size.
Mat expm(const Mat& x);

/// Closed form e^{tN}: entry (i, j) = t^{j-i}/(j-i)! for j >= i.
MatrixSpec nilpotent_exp(int n, double t);

double frob_sq(const Mat& m);
inline double frob_sq(const MatrixSpec& m) { return frob_sq(m.matrix()); }

/// Largest singular value.
double operator_norm(const Mat& m);

/// Singular values strictly above tol * sigma_max; 0 for the zero matrix.
int numerical_rank(const MatrixSpec& m, double tol = 1e-9);

/// Singular values strictly above an absolute threshold.
int rank_above(const Eigen::MatrixXcd& m, double threshold);

/// In-place w <- e^{delta·A} w by a Taylor series summed to machine precision.
/// Intended for |delta|·||A|| <= 1; larger arguments are split into substeps.
void apply_exp(const Mat& a, double delta, Vec& w);

}  // namespace heintze

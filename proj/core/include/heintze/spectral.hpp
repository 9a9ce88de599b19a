#pragma once

#include "heintze/linalg.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace heintze {

using Complex = std::complex<double>;

/// Raw eigenvalues merged into one numerically indistinguishable group.
struct EigenCluster {
    Complex value;  // representative (mean of members)
    int multiplicity = 0;
    std::vector<Complex> members;
};

struct JordanBlock {
    double lambda = 0.0;  // real part of the eigenvalue
    int size = 0;

    friend bool operator==(const JordanBlock&, const JordanBlock&) = default;
};

/// Jordan form with every eigenvalue replaced by its real part, sorted by
/// ascending lambda and then descending block size. Blocks of a complex
/// conjugate pair appear twice.
struct RealPartJordanForm {
    std::vector<JordanBlock> blocks;
    int n = 0;

    double lambda_min() const;
    double lambda_max() const;
    int max_block() const;
    /// Sum over blocks of size * lambda, i.e. the trace of the canonical matrix.
    double weighted_sum() const;
    /// Distinct lambdas in ascending order.
    std::vector<double> distinct_lambdas() const;

    RealPartJordanForm scaled(double s) const;
    /// Block diagonal matrix with lambda on the diagonal and ones on the
    /// superdiagonal inside each block, in canonical order.
    MatrixSpec canonical_matrix() const;

    friend bool operator==(const RealPartJordanForm&, const RealPartJordanForm&) = default;
};

struct SpectralOptions {
    /// Relative clustering radius: eigenvalues within cluster_tol*(1+|lambda|) merge.
    double cluster_tol = 1e-6;
    /// Singular values below rank_tol*||A||^k count as zero in rank((A-mu I)^k).
    double rank_tol = 1e-9;
};

std::vector<EigenCluster> eigen_clusters(const MatrixSpec& a, double cluster_tol = 1e-6);

/// Throws HypothesisError if an eigenvalue has real part <= cluster_tol and
/// ConditioningError if a rank sequence is inconsistent.
RealPartJordanForm real_part_jordan_form(const MatrixSpec& a, const SpectralOptions& opts = {});

struct ClassificationResult {
    bool equivalent = false;
    std::optional<double> scale;  // s with rpJF(A) = rpJF(s B)
    RealPartJordanForm form_a;
    RealPartJordanForm form_b;
    /// Smallest relative gap |l' - l|/(l' + l) between distinct lambdas of
    /// either form; 1 when every form has a single lambda.
    double min_gap = 1.0;

    std::string to_json() const;
};

/// Decides whether A and sB share a real part Jordan form for some s > 0.
ClassificationResult classify(const MatrixSpec& a, const MatrixSpec& b, const SpectralOptions& opts = {});

/// Relative comparison used by classify: same block multisets per eigenvalue
/// and |l - m| <= tol*(l + m) for corresponding lambdas.
bool forms_match(const RealPartJordanForm& a, const RealPartJordanForm& b, double tol);

}  // namespace heintze

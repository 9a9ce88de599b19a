#include "heintze/spectral.hpp"

#include "heintze/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace heintze {

double RealPartJordanForm::lambda_min() const {
    if (blocks.empty()) throw InvalidArgument("empty real part Jordan form");
    return blocks.front().lambda;
}

double RealPartJordanForm::lambda_max() const {
    if (blocks.empty()) throw InvalidArgument("empty real part Jordan form");
    return blocks.back().lambda;
}

int RealPartJordanForm::max_block() const {
    int m = 0;
    for (const auto& b : blocks) m = std::max(m, b.size);
    return m;
}

double RealPartJordanForm::weighted_sum() const {
    double s = 0;
    for (const auto& b : blocks) s += b.size * b.lambda;
    return s;
}

std::vector<double> RealPartJordanForm::distinct_lambdas() const {
    std::vector<double> out;
    for (const auto& b : blocks)
        if (out.empty() || out.back() != b.lambda) out.push_back(b.lambda);
    return out;
}

RealPartJordanForm RealPartJordanForm::scaled(double s) const {
    RealPartJordanForm out = *this;
    for (auto& b : out.blocks) b.lambda *= s;
    return out;
}

MatrixSpec RealPartJordanForm::canonical_matrix() const {
    std::vector<MatrixSpec> parts;
    parts.reserve(blocks.size());
    for (const auto& b : blocks) parts.push_back(MatrixSpec::jordan_block(b.size, b.lambda));
    return MatrixSpec::block_diagonal(parts);
}

namespace {

void sort_canonical(std::vector<JordanBlock>& blocks) {
    std::sort(blocks.begin(), blocks.end(), [](const JordanBlock& x, const JordanBlock& y) {
        if (x.lambda != y.lambda) return x.lambda < y.lambda;
        return x.size > y.size;
    });
}

std::string echo(const MatrixSpec& a) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (int i = 0; i < a.dim(); ++i) {
        os << (i ? ", [" : "[");
        for (int j = 0; j < a.dim(); ++j) os << (j ? ", " : "") << a(i, j);
        os << "]";
    }
    os << "]";
    return os.str();
}

// Mean computed as an offset from the first member, so identical members
// reproduce their common value bit for bit.
Complex mean_of(const std::vector<Complex>& members) {
    const Complex base = members.front();
    Complex acc{0, 0};
    for (const auto& m : members) acc += m - base;
    return base + acc / static_cast<double>(members.size());
}

bool close(Complex x, Complex y, double tol) {
    return std::abs(x - y) <= tol * (1.0 + std::max(std::abs(x), std::abs(y)));
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

EigenCluster make_cluster(std::vector<Complex> members, double cluster_tol) {
    std::sort(members.begin(), members.end(), [](Complex x, Complex y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    EigenCluster c;
    c.value = mean_of(members);
    // a cluster holding its own conjugate is real
    if (std::abs(c.value.imag()) <= cluster_tol * (1.0 + std::abs(c.value))) c.value.imag(0.0);
    c.multiplicity = static_cast<int>(members.size());
    c.members = std::move(members);
    return c;
}

// Groups items transitively by pairwise closeness of their values.
template <class Close>
std::vector<std::vector<int>> transitive_groups(std::size_t count, Close&& is_close) {
    UnionFind uf(count);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (is_close(i, j)) uf.unite(static_cast<int>(i), static_cast<int>(j));
    std::vector<std::vector<int>> groups(count);
    for (std::size_t i = 0; i < count; ++i) groups[static_cast<std::size_t>(uf.find(static_cast<int>(i)))].push_back(static_cast<int>(i));
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    return groups;
}

void order_clusters(std::vector<EigenCluster>& clusters) {
    std::sort(clusters.begin(), clusters.end(), [](const EigenCluster& x, const EigenCluster& y) {
        if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
        return x.value.imag() < y.value.imag();
    });
}

// Counts of blocks of size >= k for k = 1.., from r_k = rank((A - mu I)^k).
// Returns nullopt when the sequence is not a valid Jordan structure for the
// cluster's multiplicity.
std::optional<std::vector<int>> block_sizes(const MatrixSpec& a, Complex mu, int multiplicity, double rank_tol) {
    const int n = a.dim();
    double scale = operator_norm(a.matrix());
    if (scale == 0.0) scale = 1.0;
    const Eigen::MatrixXcd shifted =
        a.matrix().cast<Complex>() - mu * Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
    std::vector<int> at_least;  // at_least[k-1] = #blocks of size >= k
    int prev_rank = n;
    double threshold = rank_tol;
    for (int k = 1; k <= multiplicity; ++k) {
        power = power * shifted;
        threshold *= scale;
        const int r = rank_above(power, threshold);
        const int count = prev_rank - r;
        if (count < 0) return std::nullopt;
        if (!at_least.empty() && count > at_least.back()) return std::nullopt;
        if (count == 0) break;
        at_least.push_back(count);
        prev_rank = r;
        if (n - r == multiplicity) break;
    }
    if (at_least.empty() || n - prev_rank != multiplicity) return std::nullopt;
    std::vector<int> sizes;
    for (std::size_t k = 0; k < at_least.size(); ++k) {
        const int exact = at_least[k] - (k + 1 < at_least.size() ? at_least[k + 1] : 0);
        for (int c = 0; c < exact; ++c) sizes.push_back(static_cast<int>(k) + 1);
    }
    return sizes;
}

// Merges clusters that are split perturbations of one Jordan block: a group
// found at a larger radius is accepted only if its own rank sequence is a
// consistent Jordan structure containing a block of size >= 2.
void coalesce(const MatrixSpec& a, std::vector<EigenCluster>& clusters, const SpectralOptions& opts) {
    for (double radius = 10.0 * opts.cluster_tol; radius <= 0.1; radius *= 10.0) {
        if (clusters.size() < 2) return;
        const auto groups = transitive_groups(clusters.size(), [&](std::size_t i, std::size_t j) {
            return close(clusters[i].value, clusters[j].value, radius);
        });
        std::vector<EigenCluster> next;
        for (const auto& g : groups) {
            if (g.size() == 1) {
                next.push_back(clusters[static_cast<std::size_t>(g.front())]);
                continue;
            }
            std::vector<Complex> members;
            for (int idx : g)
                for (const auto& m : clusters[static_cast<std::size_t>(idx)].members) members.push_back(m);
            EigenCluster merged = make_cluster(std::move(members), opts.cluster_tol);
            // decide on the upper half plane and mirror, so conjugate groups agree
            Complex probe = merged.value;
            if (probe.imag() < 0) probe = std::conj(probe);
            const auto sizes = block_sizes(a, probe, merged.multiplicity, opts.rank_tol);
            const bool accept = sizes && *std::max_element(sizes->begin(), sizes->end()) >= 2;
            if (accept) {
                next.push_back(std::move(merged));
            } else {
                for (int idx : g) next.push_back(clusters[static_cast<std::size_t>(idx)]);
            }
        }
        clusters = std::move(next);
        order_clusters(clusters);
    }
}

}  // namespace

std::vector<EigenCluster> eigen_clusters(const MatrixSpec& a, double cluster_tol) {
    if (!(cluster_tol > 0)) throw InvalidArgument("cluster_tol must be > 0");
    Eigen::EigenSolver<Mat> solver(a.matrix(), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge for matrix " + echo(a));
    const Eigen::VectorXcd ev = solver.eigenvalues();
    const auto count = static_cast<std::size_t>(ev.size());
    const auto groups = transitive_groups(count, [&](std::size_t i, std::size_t j) {
        return close(ev(static_cast<Eigen::Index>(i)), ev(static_cast<Eigen::Index>(j)), cluster_tol);
    });
    std::vector<EigenCluster> clusters;
    for (const auto& g : groups) {
        std::vector<Complex> members;
        for (int idx : g) members.push_back(ev(idx));
        clusters.push_back(make_cluster(std::move(members), cluster_tol));
    }
    // conjugate symmetry: pair every upper cluster with a lower one of equal multiplicity
    for (auto& c : clusters) {
        if (c.value.imag() <= 0) continue;
        EigenCluster* partner = nullptr;
        double best = 0;
        for (auto& d : clusters) {
            if (d.value.imag() >= 0) continue;
            const double dist = std::abs(d.value - std::conj(c.value));
            if (!partner || dist < best) {
                partner = &d;
                best = dist;
            }
        }
        if (!partner || partner->multiplicity != c.multiplicity)
            throw SolverError("eigenvalues violate conjugate symmetry for matrix " + echo(a));
        partner->value = std::conj(c.value);
    }
    order_clusters(clusters);
    return clusters;
}

RealPartJordanForm real_part_jordan_form(const MatrixSpec& a, const SpectralOptions& opts) {
    if (!(opts.rank_tol > 0)) throw InvalidArgument("rank_tol must be > 0");
    auto clusters = eigen_clusters(a, opts.cluster_tol);
    for (const auto& c : clusters) {
        if (c.value.real() <= opts.cluster_tol) {
            std::ostringstream os;
            os.precision(12);
            os << "eigenvalue " << c.value.real();
            if (c.value.imag() != 0) os << (c.value.imag() > 0 ? "+" : "") << c.value.imag() << "i";
            os << " does not have positive real part";
            throw HypothesisError(os.str());
        }
    }
    coalesce(a, clusters, opts);

    RealPartJordanForm form;
    form.n = a.dim();
    for (const auto& c : clusters) {
        if (c.value.imag() < 0) continue;  // counted with its upper partner
        const auto sizes = block_sizes(a, c.value, c.multiplicity, opts.rank_tol);
        if (!sizes) {
            std::ostringstream os;
            os.precision(12);
            os << "inconsistent rank sequence for eigenvalue cluster at " << c.value.real();
            if (c.value.imag() != 0) os << (c.value.imag() > 0 ? "+" : "") << c.value.imag() << "i";
            os << " (multiplicity " << c.multiplicity << "); retry with a larger tolerance";
            throw ConditioningError(os.str());
        }
        const int copies = c.value.imag() > 0 ? 2 : 1;
        for (int s : *sizes)
            for (int k = 0; k < copies; ++k) form.blocks.push_back({c.value.real(), s});
    }
    sort_canonical(form.blocks);
    return form;
}

namespace {

struct LambdaGroup {
    double lambda;
    std::vector<int> sizes;  // descending
};

std::vector<LambdaGroup> group_by_lambda(const RealPartJordanForm& f) {
    std::vector<LambdaGroup> out;
    for (const auto& b : f.blocks) {
        if (out.empty() || out.back().lambda != b.lambda) out.push_back({b.lambda, {}});
        out.back().sizes.push_back(b.size);
    }
    return out;
}

double relative_gap(const RealPartJordanForm& f) {
    const auto l = f.distinct_lambdas();
    double gap = 1.0;
    for (std::size_t i = 1; i < l.size(); ++i) gap = std::min(gap, (l[i] - l[i - 1]) / (l[i] + l[i - 1]));
    return gap;
}

}  // namespace

bool forms_match(const RealPartJordanForm& a, const RealPartJordanForm& b, double tol) {
    if (a.n != b.n) return false;
    const auto ga = group_by_lambda(a);
    const auto gb = group_by_lambda(b);
    if (ga.size() != gb.size()) return false;
    for (std::size_t i = 0; i < ga.size(); ++i) {
        if (ga[i].sizes != gb[i].sizes) return false;
        const double x = ga[i].lambda, y = gb[i].lambda;
        if (std::abs(x - y) > tol * (x + y)) return false;
    }
    return true;
}

ClassificationResult classify(const MatrixSpec& a, const MatrixSpec& b, const SpectralOptions& opts) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument("classify: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    ClassificationResult r;
    r.form_a = real_part_jordan_form(a, opts);
    r.form_b = real_part_jordan_form(b, opts);
    r.min_gap = std::min(relative_gap(r.form_a), relative_gap(r.form_b));
    const double s = r.form_a.lambda_min() / r.form_b.lambda_min();
    r.equivalent = forms_match(r.form_a, r.form_b.scaled(s), opts.cluster_tol);
    if (r.equivalent) r.scale = s;
    return r;
}

std::string ClassificationResult::to_json() const {
    auto blocks = [](const RealPartJordanForm& f) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& b : f.blocks) arr.push_back(nlohmann::json::array({b.lambda, b.size}));
        return arr;
    };
    nlohmann::ordered_json doc;
    doc["equivalent"] = equivalent;
    doc["scale"] = scale ? nlohmann::ordered_json(*scale) : nlohmann::ordered_json(nullptr);
    doc["form_a"] = blocks(form_a);
    doc["form_b"] = blocks(form_b);
    doc["min_gap"] = min_gap;
    return doc.dump();
}

}  // namespace heintze

#include "cli.hpp"

#include "manifest.hpp"

#include "heintze/boundary.hpp"
#include "heintze/error.hpp"
#include "heintze/io.hpp"
#include "heintze/maps.hpp"
#include "heintze/spectral.hpp"
#include "heintze/variation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef HEINTZE_VERSION
#define HEINTZE_VERSION "0.0.0"
#endif

namespace heintze::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write " + path.string());
    f << body;
    if (!f) throw ParseError("write failed: " + path.string());
}

long max_cells_from_env() {
    const char* env = std::getenv("HEINTZE_MAX_CELLS");
    if (!env || !*env) return kDefaultMaxCells;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 1) throw InvalidArgument(std::string("HEINTZE_MAX_CELLS must be a positive integer, got '") + env + "'");
    return static_cast<long>(v);
}

// Shared state for one invocation; subcommands register their options here.
struct Context {
    std::vector<std::string> argv;
    std::ostream& out;
    std::ostream& err;

    void write_manifest(const CLI::App& sub, const fs::path& path, std::uint64_t seed,
                        const std::vector<fs::path>& inputs) const {
        RunManifest m;
        m.command = sub.get_name();
        m.argv = argv;
        for (const CLI::Option* opt : sub.get_options()) {
            if (opt->get_name() == "--help") continue;
            const auto& res = opt->results();
            std::string value;
            if (!res.empty()) {
                for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
            } else {
                value = opt->get_default_str();
            }
            m.flags[opt->get_name()] = value;
        }
        m.seed = seed;
        m.version = HEINTZE_VERSION;
        for (const auto& in : inputs) m.input_digests[in.string()] = sha256_file(in);
        m.timestamp = utc_timestamp();
        write_file(path, m.to_json());
    }
};

struct SpectralFlags {
    double cluster_tol = 1e-6;
    double rank_tol = 1e-9;

    void add(CLI::App* app) {
        app->add_option("--tol", cluster_tol, "Eigenvalue clustering tolerance (relative)")->capture_default_str();
        app->add_option("--rank-tol", rank_tol, "Rank threshold for Jordan block detection")->capture_default_str();
    }
    SpectralOptions options() const { return {cluster_tol, rank_tol}; }
};

struct SolverFlags {
    SolverConfig cfg;

    void add(CLI::App* app) {
        app->add_option("--scan-step", cfg.scan_step, "Root scan step")->capture_default_str();
        app->add_option("--t-tol", cfg.t_tol, "Bisection tolerance on t")->capture_default_str();
        app->add_option("--bracket-margin", cfg.bracket_margin, "Growth constant sampling margin")
            ->capture_default_str();
        app->add_option("--safety-factor", cfg.safety_factor, "Growth constant multiplier")->capture_default_str();
    }
};

}  // namespace

std::vector<double> parse_list(std::string_view text) {
    const Vec v = parse_vector_csv(text);
    return {v.data(), v.data() + v.size()};
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = text.find(':', start);
        const auto piece = text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
        const Vec one = parse_vector_csv(piece);
        if (one.size() != 1) throw ParseError("grid: expected start:stop:step, got '" + std::string(text) + "'");
        parts.push_back(one(0));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw ParseError("grid: expected start:stop:step, got '" + std::string(text) + "'");
    const double a = parts[0], b = parts[1], h = parts[2];
    if (h == 0 || (b - a) * h < 0) throw InvalidArgument("grid: step must be nonzero and point from start to stop");
    const double span = (b - a) / h;
    if (span > 1e6) throw InvalidArgument("grid: too many points");
    const long count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) grid.push_back(a + static_cast<double>(i) * h);
    return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{args, out, err};
    CLI::App app{"Boundary quasimetrics of Heintze groups R^n x_A R", "heintze"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HEINTZE_VERSION);

    std::function<int()> action;
    std::vector<std::function<void()>> binders;

    // rpjf
    auto* rpjf = app.add_subcommand("rpjf", "Print the real part Jordan form as 'lambda x size' lines");
    std::string rpjf_file;
    SpectralFlags rpjf_spec;
    rpjf->add_option("matrix", rpjf_file, "Matrix JSON file")->required();
    rpjf_spec.add(rpjf);
    rpjf->callback([&] {
        action = [&] {
            const auto form = real_part_jordan_form(load_matrix(rpjf_file), rpjf_spec.options());
            for (const auto& b : form.blocks) out << fmt12(b.lambda) << " x " << b.size << "\n";
            return kOk;
        };
    });

    // classify
    auto* cls = app.add_subcommand("classify", "Decide whether two generators give quasiisometric groups");
    std::string cls_a, cls_b;
    SpectralFlags cls_spec;
    cls->add_option("matrix_a", cls_a, "First matrix JSON file")->required();
    cls->add_option("matrix_b", cls_b, "Second matrix JSON file")->required();
    cls_spec.add(cls);
    cls->callback([&] {
        action = [&] {
            const auto r = classify(load_matrix(cls_a), load_matrix(cls_b), cls_spec.options());
            out << r.to_json() << "\n";
            return r.equivalent ? kOk : kNotEquivalent;
        };
    });

    // dist
    auto* dist = app.add_subcommand("dist", "Evaluate D_A(x, y)");
    std::string dist_file, dist_x, dist_y;
    SolverFlags dist_solver;
    dist->add_option("matrix", dist_file, "Matrix JSON file")->required();
    dist->add_option("x", dist_x, "Comma-separated point")->required();
    dist->add_option("y", dist_y, "Comma-separated point")->required();
    dist_solver.add(dist);
    dist->callback([&] {
        action = [&] {
            const BoundarySpace space(load_matrix(dist_file), dist_solver.cfg);
            const Vec x = parse_vector_csv(dist_x), y = parse_vector_csv(dist_y);
            if (x.size() != space.dim() || y.size() != space.dim())
                throw InvalidArgument("dist: points must have dimension " + std::to_string(space.dim()));
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12f", space.dist(x, y));
            out << buf << "\n";
            return kOk;
        };
    });

    // qvar
    auto* qvar = app.add_subcommand("qvar", "Q-variation packing sums and log-slope fits");
    std::string qv_matrix, qv_ell, qv_box, qv_t = "-6:-4:1", qv_q = "1,1.5,2", qv_out = "report.csv";
    int qv_u = 0;
    long qv_cap = 0;
    qvar->add_option("--matrix", qv_matrix, "Matrix JSON file")->required();
    auto* u_opt = qvar->add_option("--u", qv_u, "Coordinate test function u(x) = x_INDEX (1-based)");
    auto* ell_opt = qvar->add_option("--ell", qv_ell, "Linear test function coefficients");
    u_opt->excludes(ell_opt);
    qvar->add_option("--box", qv_box, "Box 'lo1,hi1;lo2,hi2;...' (default unit cube)");
    qvar->add_option("--t", qv_t, "Scale grid start:stop:step, all below -1")->capture_default_str();
    qvar->add_option("--q", qv_q, "Exponents Q >= 1")->capture_default_str();
    qvar->add_option("--out", qv_out, "Row report; fits go to <stem>-fits.csv")->capture_default_str();
    qvar->add_option("--max-cells", qv_cap, "Packing cap (overrides HEINTZE_MAX_CELLS)");
    qvar->callback([&] {
        action = [&] {
            const MatrixSpec a = load_matrix(qv_matrix);
            const int n = a.dim();
            if (u_opt->count() == 0 && ell_opt->count() == 0) throw InvalidArgument("qvar: give --u or --ell");
            TestFunction u = TestFunction::coordinate(n, 0);
            if (u_opt->count()) {
                if (qv_u < 1 || qv_u > n) throw InvalidArgument("qvar: --u must be in 1.." + std::to_string(n));
                u = TestFunction::coordinate(n, qv_u - 1);
            } else {
                u = TestFunction::linear(parse_vector_csv(qv_ell));
            }
            const Box box = qv_box.empty() ? Box::unit(n) : Box::parse(qv_box);
            const long cap = qv_cap > 0 ? qv_cap : max_cells_from_env();
            const auto report = fit_exponents(a, u, box, parse_grid(qv_t), parse_list(qv_q), cap);
            const fs::path rows_path = qv_out;
            fs::path fits_path = rows_path;
            fits_path.replace_filename(rows_path.stem().string() + "-fits" + rows_path.extension().string());
            write_file(rows_path, report.rows_csv());
            write_file(fits_path, report.fits_csv());
            ctx.write_manifest(*qvar, manifest_path_for(rows_path), 0, {qv_matrix});
            out << report.fits_csv();
            return kOk;
        };
    });

    // qsmap-verify
    auto* qsv = app.add_subcommand("qsmap-verify", "Empirical distortion of a boundary map against its bound");
    std::string qs_map, qs_matrix, qs_out;
    int qs_samples = 10000, qs_triples = 0;
    std::uint64_t qs_seed = 0;
    double qs_radius = 1.0;
    SolverFlags qs_solver;
    qsv->add_option("--map", qs_map, "Map JSON file")->required();
    qsv->add_option("--matrix", qs_matrix, "Generator A (default J_n)");
    qsv->add_option("--samples", qs_samples, "Sampled pairs")->capture_default_str();
    qsv->add_option("--triples", qs_triples, "Sampled triples for the eta profile (0 = skip)")
        ->capture_default_str();
    qsv->add_option("--seed", qs_seed, "Random seed")->capture_default_str();
    qsv->add_option("--box-radius", qs_radius, "Sampling box half-width")->capture_default_str();
    qsv->add_option("--out", qs_out, "Report CSV (stdout when omitted)");
    qs_solver.add(qsv);
    qsv->callback([&] {
        action = [&] {
            const QSMap map = QSMap::from_json(read_text_file(qs_map));
            const MatrixSpec a = qs_matrix.empty() ? MatrixSpec::jordan_block(map.dim()) : load_matrix(qs_matrix);
            const BoundarySpace space(a, qs_solver.cfg);
            const RatioRange range = empirical_bilip(map, space, qs_samples, qs_seed, qs_radius);
            const auto bound = qs_matrix.empty() ? theoretical_bound(map) : std::nullopt;
            std::string body = "kind,n,seed,pairs,min_ratio,max_ratio,bound,inside\n";
            body += map.kind() + "," + std::to_string(map.dim()) + "," + std::to_string(qs_seed) + "," +
                    std::to_string(range.pairs) + "," + fmt12(range.min_ratio) + "," + fmt12(range.max_ratio) + ",";
            if (bound) {
                const double b = bound.value_or(1.0);
                const bool inside = range.max_ratio <= b * (1 + 1e-9) && range.min_ratio * b >= 1 - 1e-9;
                body += fmt12(b) + "," + (inside ? "yes" : "no") + "\n";
            } else {
                body += ",\n";
            }
            std::string profile;
            if (qs_triples > 0) {
                const QSProfile p = qs_profile(map, space, qs_triples, qs_seed, qs_radius);
                profile = "input_ratio,eta\n";
                for (const auto& [t, e] : p.envelope) profile += fmt12(t) + "," + fmt12(e) + "\n";
            }
            if (qs_out.empty()) {
                out << body;
                if (!profile.empty()) out << "\n" << profile;
                return kOk;
            }
            const fs::path path = qs_out;
            write_file(path, body);
            std::vector<fs::path> inputs{qs_map};
            if (!qs_matrix.empty()) inputs.emplace_back(qs_matrix);
            if (!profile.empty()) {
                fs::path ppath = path;
                ppath.replace_filename(path.stem().string() + "-eta" + path.extension().string());
                write_file(ppath, profile);
            }
            ctx.write_manifest(*qsv, manifest_path_for(path), qs_seed, inputs);
            out << body;
            return kOk;
        };
    });

    // conformal-probe
    auto* cp = app.add_subcommand("conformal-probe", "Stretch and distortion of a map along x = o + e^{tN}(0,..,0,e^t)");
    std::string cp_map, cp_origin, cp_t = "-1:-8:-1", cp_out;
    SolverFlags cp_solver;
    cp->add_option("--map", cp_map, "Map JSON file")->required();
    cp->add_option("--origin", cp_origin, "Base point o (default 0)");
    cp->add_option("--t", cp_t, "Heights start:stop:step")->capture_default_str();
    cp->add_option("--out", cp_out, "Report CSV (stdout when omitted)");
    cp_solver.add(cp);
    cp->callback([&] {
        action = [&] {
            const QSMap map = QSMap::from_json(read_text_file(cp_map));
            const Vec origin = cp_origin.empty() ? Vec::Zero(map.dim()) : parse_vector_csv(cp_origin);
            const ConformalProbe probe = conformal_probe(map, origin, parse_grid(cp_t), cp_solver.cfg);
            const std::string body = probe.csv();
            if (cp_out.empty()) {
                out << body;
                return kOk;
            }
            write_file(cp_out, body);
            ctx.write_manifest(*cp, manifest_path_for(cp_out), 0, {cp_map});
            const ProbeRow& last = probe.rows.back();
            out << "t=" << fmt12(last.t) << " stretch=" << fmt12(last.stretch)
                << " distortion=" << fmt12(last.distortion) << "\n";
            return kOk;
        };
    });

    // replay
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    std::string rp_manifest;
    rp->add_option("manifest", rp_manifest, "Manifest JSON file")->required();
    rp->callback([&] {
        action = [&] {
            const RunManifest m = RunManifest::from_json(read_text_file(rp_manifest));
            if (!m.argv.empty() && m.argv.front() == "replay") throw InvalidArgument("replay: manifest records a replay");
            return run(m.argv, out, err);
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        return action ? action() : kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace heintze::cli

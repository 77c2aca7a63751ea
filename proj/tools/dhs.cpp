#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhs/abstract.hpp"
#include "dhs/bounds.hpp"
#include "dhs/complex.hpp"
#include "dhs/errors.hpp"
#include "dhs/geometry.hpp"
#include "dhs/report.hpp"
#include "dhs/rng.hpp"
#include "dhs/spectrum.hpp"

namespace {

using namespace dhs;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("DHS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError("DHS_SEED is not an unsigned integer");
        }
    }
    return SolveOptions{}.seed;
}

struct GeometryOpts {
    std::string builtin;
    std::string mesh_path;
};

void add_geometry_options(CLI::App* cmd, GeometryOpts& geo) {
    cmd->add_option("--builtin", geo.builtin,
                    "builtin geometry: sphere:m=<int>[:res=<int>], circle[:res=<int>], mesh:<path>");
    cmd->add_option("--mesh", geo.mesh_path, "mesh file (.off/.obj surface, .poly/.xy/.txt polyline)");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) out.push_back(item);
    return out;
}

int parse_field(const std::string& token, const std::string& key) {
    if (token.rfind(key + "=", 0) != 0)
        throw InputError("builtin: expected " + key + "=<int>, got '" + token + "'");
    try {
        return std::stoi(token.substr(key.size() + 1));
    } catch (const std::exception&) {
        throw InputError("builtin: bad integer in '" + token + "'");
    }
}

GeometryBackend make_backend(const GeometryOpts& geo) {
    if (!geo.builtin.empty() && !geo.mesh_path.empty())
        throw InputError("give either --builtin or --mesh, not both");
    if (!geo.mesh_path.empty()) return mesh_backend(geo.mesh_path);
    if (geo.builtin.empty()) throw InputError("a geometry source is required (--builtin or --mesh)");

    const std::string& name = geo.builtin;
    if (name.rfind("mesh:", 0) == 0) return mesh_backend(name.substr(5));
    auto tokens = split(name, ':');
    if (tokens.empty()) throw InputError("empty builtin name");
    if (tokens[0] == "circle") {
        int res = -1;
        if (tokens.size() > 2) throw InputError("builtin circle takes at most one :res=<int> field");
        if (tokens.size() == 2) res = parse_field(tokens[1], "res");
        return sphere_backend(1, 2, res);
    }
    if (tokens[0] == "sphere") {
        if (tokens.size() < 2) throw InputError("builtin sphere needs :m=<int>");
        int m = parse_field(tokens[1], "m");
        int res = -1;
        if (tokens.size() > 3) throw InputError("builtin sphere takes at most :m= and :res= fields");
        if (tokens.size() == 3) res = parse_field(tokens[2], "res");
        return sphere_backend(m, m + 1, res);
    }
    throw InputError("unknown builtin '" + tokens[0] + "' (expected sphere, circle, or mesh)");
}

bool has_grid(const GeometryBackend& bk) {
    return bk.surface.has_value() || bk.curve.has_value();
}

bool analytic_kind(const GeometryBackend& bk) {
    return bk.kind == BackendKind::analytic_sphere || bk.kind == BackendKind::analytic_circle;
}

bool closed_form_available(const GeometryBackend& bk, int p) {
    return analytic_kind(bk) && (bk.m == 1 || p == 0 || p == bk.m);
}

void check_degree(const GeometryBackend& bk, int p) {
    if (p < 0 || p > bk.m)
        throw InputError("degree p = " + std::to_string(p) + " outside [0, m] for m = " +
                         std::to_string(bk.m));
}

Spectrum discrete_spectrum(const WeightedComplex& cx, int p, int count, double tol,
                           std::uint64_t seed) {
    auto [k, m] = hodge_laplacian(cx, p);
    SolveOptions options;
    options.tol = tol;
    options.seed = seed;
    return solve_spectrum(k, m, count, options);
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path);
    out << text;
}

RhsMode parse_mode(const std::string& mode, bool discrete) {
    if (mode == "exact-integral") return RhsMode::exact;
    if (mode == "geometric-max") return RhsMode::geometric;
    if (!mode.empty()) throw InputError("unknown mode '" + mode + "'");
    // unset: exact integrals for closed-form spectra, geometric bound for mesh data
    return discrete ? RhsMode::geometric : RhsMode::exact;
}

Spectrum spectrum_from_json_file(const std::string& path, int p) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read spectrum file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw InputError(std::string("spectrum file parse error: ") + e.what());
    }
    if (!doc.contains("degree") || !doc.contains("eigenvalues"))
        throw InputError("spectrum file needs 'degree' and 'eigenvalues' fields");
    Spectrum sp;
    sp.degree = doc["degree"].get<int>();
    if (sp.degree != p)
        throw InputError("spectrum file degree " + std::to_string(sp.degree) +
                         " does not match requested p = " + std::to_string(p));
    auto values = doc["eigenvalues"].get<std::vector<double>>();
    sp.eigenvalues = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    sp.residuals = Eigen::VectorXd::Zero(sp.eigenvalues.size());
    if (doc.contains("residuals")) {
        auto res = doc["residuals"].get<std::vector<double>>();
        if (res.size() == values.size())
            sp.residuals = Eigen::Map<Eigen::VectorXd>(res.data(), static_cast<Eigen::Index>(res.size()));
    }
    sp.clusters = multiplicity_clusters(sp.eigenvalues);
    return sp;
}

// ---- spectrum ----

struct SpectrumConfig {
    GeometryOpts geo;
    std::vector<int> ps{0};
    int count = 16;
    double tolerance = 1e-9;
    std::uint64_t seed = 0;
    int threads = 1;
    bool analytic = false;
    bool discrete = false;
    std::string output;
};

int cmd_spectrum(const SpectrumConfig& cfg) {
    if (cfg.count < 1) throw InputError("count must be positive");
    if (cfg.analytic && cfg.discrete) throw InputError("--analytic and --discrete conflict");
    GeometryBackend bk = make_backend(cfg.geo);
    for (int p : cfg.ps) check_degree(bk, p);

    bool use_closed_form = cfg.analytic || (!cfg.discrete && !has_grid(bk));
    WeightedComplex cx;
    if (!use_closed_form) {
        if (!has_grid(bk))
            throw CapabilityError("no discretization grid for this geometry; use --analytic");
        cx = build_complex(bk);
    }

    std::vector<std::string> blocks;
    for (int p : cfg.ps) {
        Spectrum sp;
        if (use_closed_form) {
            if (!closed_form_available(bk, p))
                throw CapabilityError("closed-form spectrum unavailable for p = " +
                                      std::to_string(p) + " on this geometry");
            sp = analytic_sphere_spectrum(bk.m, p, cfg.count);
        } else {
            sp = discrete_spectrum(cx, p, cfg.count, cfg.tolerance, cfg.seed);
        }
        blocks.push_back(spectrum_to_json(sp));
    }

    std::string text;
    if (blocks.size() == 1) {
        text = blocks[0] + "\n";
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& b : blocks) arr.push_back(nlohmann::ordered_json::parse(b));
        text = arr.dump(2) + "\n";
    }
    emit(text, cfg.output);
    return 0;
}

// ---- bounds ----

struct BoundsConfig {
    GeometryOpts geo;
    std::vector<int> ps{0};
    int k_max = 50;
    int count = -1;  // default: k_max + 1 + m
    std::string mode;
    double tolerance = 1e-9;
    bool classical = false;
    bool discrete = false;
    std::string format = "csv";
    std::string spectrum_json;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output;
};

struct SuiteRun {
    std::vector<BoundReport> reports;
    bool all_pass = true;
};

SuiteRun run_bound_suites(const BoundsConfig& cfg, const GeometryBackend& bk) {
    if (cfg.k_max < 1) throw InputError("k-max must be positive");
    int count = cfg.count > 0 ? cfg.count : cfg.k_max + 1 + bk.m;
    if (count < cfg.k_max + 1)
        throw InputError("count must be at least k-max + 1 = " + std::to_string(cfg.k_max + 1));
    if (!cfg.spectrum_json.empty() && cfg.ps.size() != 1)
        throw InputError("--spectrum-json applies to a single --p value");

    WeightedComplex cx;
    bool built = false;
    if (has_grid(bk)) {
        cx = build_complex(bk);
        built = true;
    }

    SuiteRun run;
    for (int p : cfg.ps) {
        check_degree(bk, p);
        Spectrum sp;
        if (!cfg.spectrum_json.empty()) {
            sp = spectrum_from_json_file(cfg.spectrum_json, p);
        } else if (!cfg.discrete && closed_form_available(bk, p)) {
            sp = analytic_sphere_spectrum(bk.m, p, count);
        } else {
            if (!built)
                throw CapabilityError("no discretization grid for this geometry at p = " +
                                      std::to_string(p));
            sp = discrete_spectrum(cx, p, count, 1e-9, cfg.seed);
        }
        SuiteOptions options;
        options.k_max = cfg.k_max;
        options.tolerance = cfg.tolerance;
        options.classical = cfg.classical;
        options.mode = parse_mode(cfg.mode, !sp.analytic && sp.eigenforms.size() > 0);
        BoundReport report = bound_suite(sp, bk, built ? &cx : nullptr, options);
        run.all_pass = run.all_pass && report.all_pass();
        run.reports.push_back(std::move(report));
    }
    return run;
}

std::string render_reports(const SuiteRun& run, const std::string& format) {
    if (format == "csv") {
        std::string text;
        for (std::size_t i = 0; i < run.reports.size(); ++i) {
            std::string block = bound_report_csv(run.reports[i]);
            if (i > 0) block.erase(0, block.find('\n') + 1);
            text += block;
        }
        return text;
    }
    if (format != "json") throw InputError("unknown format '" + format + "'");
    if (run.reports.size() == 1) return bound_report_json(run.reports[0]);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& report : run.reports)
        arr.push_back(nlohmann::ordered_json::parse(bound_report_json(report)));
    return arr.dump(2) + "\n";
}

int cmd_bounds(const BoundsConfig& cfg) {
    GeometryBackend bk = make_backend(cfg.geo);
    SuiteRun run = run_bound_suites(cfg, bk);
    emit(render_reports(run, cfg.format), cfg.output);
    return run.all_pass ? 0 : 1;
}

// ---- verify ----

struct VerifyConfig {
    GeometryOpts geo;
    std::vector<int> ps{0};
    int k_max = 16;
    int count = -1;
    std::string mode;
    double tolerance = 1e-9;
    bool classical = false;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output;
};

int cmd_verify(const VerifyConfig& cfg) {
    GeometryBackend bk = make_backend(cfg.geo);
    for (int p : cfg.ps) check_degree(bk, p);
    if (cfg.k_max < 1) throw InputError("k-max must be positive");
    int count = cfg.count > 0 ? cfg.count : cfg.k_max + 8;
    if (count < cfg.k_max + 1)
        throw InputError("count must be at least k-max + 1 = " + std::to_string(cfg.k_max + 1));

    WeightedComplex cx;
    bool built = false;
    if (has_grid(bk)) {
        cx = build_complex(bk);
        built = true;
    }

    nlohmann::ordered_json root;
    root["command"] = "verify";
    root["geometry"] = {{"kind", to_string(bk.kind)},
                        {"m", bk.m},
                        {"n", bk.n},
                        {"samples", bk.samples.size()}};
    root["seed"] = cfg.seed;
    root["threads"] = cfg.threads;
    root["tolerance"] = cfg.tolerance;

    nlohmann::ordered_json diagnostics;
    diagnostics["shrinker_residual"] = shrinker_residual(bk);
    if (built) {
        double dd = 0.0;
        for (int p = 1; p + 1 <= bk.m; ++p) {
            Eigen::SparseMatrix<double> comp = cx.d[static_cast<std::size_t>(p)] *
                                               cx.d[static_cast<std::size_t>(p - 1)];
            for (int c = 0; c < comp.outerSize(); ++c)
                for (Eigen::SparseMatrix<double>::InnerIterator it(comp, c); it; ++it)
                    dd = std::max(dd, std::abs(it.value()));
        }
        diagnostics["dd_composition_max"] = dd;
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(cx.cells(0));
        diagnostics["drift_constant_residual"] = drift_apply(cx, ones).cwiseAbs().maxCoeff();
        diagnostics["coordinate_eigenfunction_residual"] = coordinate_eigenfunction_check(cx, bk);
    }
    root["diagnostics"] = diagnostics;

    nlohmann::ordered_json spectra = nlohmann::ordered_json::array();
    bool all_pass = true;
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (int p : cfg.ps) {
        Spectrum sp;
        if (built) {
            sp = discrete_spectrum(cx, p, count, 1e-9, cfg.seed);
        } else if (closed_form_available(bk, p)) {
            sp = analytic_sphere_spectrum(bk.m, p, count);
        } else {
            throw CapabilityError("no spectrum route for p = " + std::to_string(p) +
                                  " on this geometry");
        }
        spectra.push_back(nlohmann::ordered_json::parse(spectrum_to_json(sp)));

        SuiteOptions options;
        options.k_max = cfg.k_max;
        options.tolerance = cfg.tolerance;
        options.classical = cfg.classical;
        options.mode = parse_mode(cfg.mode, !sp.analytic && sp.eigenforms.size() > 0);
        BoundReport report = bound_suite(sp, bk, built ? &cx : nullptr, options);
        all_pass = all_pass && report.all_pass();
        reports.push_back(nlohmann::ordered_json::parse(bound_report_json(report)));
    }
    root["spectra"] = spectra;
    root["bounds"] = reports;
    root["all_pass"] = all_pass;
    emit(root.dump(2) + "\n", cfg.output);
    return all_pass ? 0 : 1;
}

// ---- abstract ----

struct AbstractConfig {
    int trials = 1000;
    int n_max = 12;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output;
};

int cmd_abstract(const AbstractConfig& cfg) {
    if (cfg.trials < 1) throw InputError("trials must be positive");
    Rng root_rng(cfg.seed);
    std::uint64_t ah_seed = root_rng.next_u64();
    std::uint64_t lpt_seed = root_rng.next_u64();
    std::uint64_t tri_seed = root_rng.next_u64();

    std::vector<BatchResult> batches;
    batches.push_back(ah_batch(cfg.trials, ah_seed, cfg.n_max, cfg.threads));
    batches.push_back(lpt_batch(cfg.trials, lpt_seed, cfg.n_max, cfg.threads));
    batches.push_back(triangularize_batch(cfg.trials, tri_seed, cfg.n_max, cfg.threads));

    nlohmann::ordered_json summary;
    int trials = 0;
    double max_violation = 0.0;
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    nlohmann::ordered_json detail = nlohmann::ordered_json::array();
    bool ok = true;
    for (const auto& batch : batches) {
        trials += batch.trials;
        max_violation = std::max(max_violation, batch.max_violation);
        ok = ok && batch.ok();
        for (const auto& f : batch.failures) {
            nlohmann::ordered_json item;
            item["batch"] = batch.name;
            item["trial"] = f.trial;
            item["what"] = f.what;
            if (!f.dump.empty()) item["detail"] = nlohmann::ordered_json::parse(f.dump);
            failures.push_back(item);
        }
        detail.push_back(nlohmann::ordered_json::parse(batch_summary_json(batch)));
    }
    summary["trials"] = trials;
    summary["max_violation"] = max_violation;
    summary["failures"] = failures;
    summary["batches"] = detail;
    emit(summary.dump(2) + "\n", cfg.output);
    return ok ? 0 : 1;
}

int dispatch(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const IdentityError& e) {
        std::cerr << "identity violation: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted Hodge spectra and universal eigenvalue bounds on self-shrinkers"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    SpectrumConfig sc;
    sc.seed = seed;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "compute weighted Hodge spectra");
    add_geometry_options(spectrum_cmd, sc.geo);
    spectrum_cmd->add_option("--p", sc.ps, "form degrees (default 0)");
    spectrum_cmd->add_option("--count", sc.count, "number of eigenvalues (default 16)");
    spectrum_cmd->add_option("--tolerance", sc.tolerance, "solver tolerance (default 1e-9)");
    spectrum_cmd->add_option("--seed", sc.seed, "solver seed (overrides DHS_SEED)");
    spectrum_cmd->add_option("--threads", sc.threads, "worker thread cap");
    spectrum_cmd->add_flag("--analytic", sc.analytic, "use the closed-form spectrum");
    spectrum_cmd->add_flag("--discrete", sc.discrete, "force the discrete solver");
    spectrum_cmd->add_option("--output", sc.output, "output file (default stdout)");

    BoundsConfig bc;
    bc.seed = seed;
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the eigenvalue inequality suite");
    add_geometry_options(bounds_cmd, bc.geo);
    bounds_cmd->add_option("--p", bc.ps, "form degrees (default 0)");
    bounds_cmd->add_option("--k-max", bc.k_max, "largest inequality index (default 50)");
    bounds_cmd->add_option("--count", bc.count, "eigenvalues to use (default k-max + 1 + m)");
    bounds_cmd->add_option("--mode", bc.mode,
                           "rhs mode: exact-integral or geometric-max (default by spectrum kind)");
    bounds_cmd->add_option("--tolerance", bc.tolerance, "slack tolerance (default 1e-9)");
    bounds_cmd->add_flag("--classical", bc.classical, "append audit rows for the unweighted inequalities");
    bounds_cmd->add_flag("--discrete", bc.discrete, "force the discrete solver");
    bounds_cmd->add_option("--format", bc.format, "csv or json (default csv)");
    bounds_cmd->add_option("--spectrum-json", bc.spectrum_json,
                           "evaluate a spectrum loaded from a JSON file instead of solving");
    bounds_cmd->add_option("--seed", bc.seed, "solver seed (overrides DHS_SEED)");
    bounds_cmd->add_option("--threads", bc.threads, "worker thread cap");
    bounds_cmd->add_option("--output", bc.output, "output file (default stdout)");

    VerifyConfig vc;
    vc.seed = seed;
    auto* verify_cmd =
        app.add_subcommand("verify", "spectrum + bounds + structural residual diagnostics");
    add_geometry_options(verify_cmd, vc.geo);
    verify_cmd->add_option("--p", vc.ps, "form degrees (default 0)");
    verify_cmd->add_option("--k-max", vc.k_max, "largest inequality index (default 16)");
    verify_cmd->add_option("--count", vc.count, "eigenvalues to use (default k-max + 8)");
    verify_cmd->add_option("--mode", vc.mode,
                           "rhs mode: exact-integral or geometric-max (default by spectrum kind)");
    verify_cmd->add_option("--tolerance", vc.tolerance, "slack tolerance (default 1e-9)");
    verify_cmd->add_flag("--classical", vc.classical, "append audit rows for the unweighted inequalities");
    verify_cmd->add_option("--seed", vc.seed, "solver seed (overrides DHS_SEED)");
    verify_cmd->add_option("--threads", vc.threads, "worker thread cap");
    verify_cmd->add_option("--output", vc.output, "output file (default stdout)");

    AbstractConfig ac;
    ac.seed = seed;
    auto* abstract_cmd =
        app.add_subcommand("abstract", "randomized verification of the operator identities");
    abstract_cmd->add_option("--trials", ac.trials, "trials per batch (default 1000)");
    abstract_cmd->add_option("--n-max", ac.n_max, "largest matrix dimension (default 12)");
    abstract_cmd->add_option("--seed", ac.seed, "root seed (overrides DHS_SEED)");
    abstract_cmd->add_option("--threads", ac.threads, "worker thread cap");
    abstract_cmd->add_option("--output", ac.output, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand(spectrum_cmd)) return dispatch([&] { return cmd_spectrum(sc); });
    if (app.got_subcommand(bounds_cmd)) return dispatch([&] { return cmd_bounds(bc); });
    if (app.got_subcommand(verify_cmd)) return dispatch([&] { return cmd_verify(vc); });
    if (app.got_subcommand(abstract_cmd)) return dispatch([&] { return cmd_abstract(ac); });
    return 2;
}

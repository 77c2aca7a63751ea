#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "dhs/bounds.hpp"
#include "dhs/complex.hpp"
#include "dhs/errors.hpp"
#include "dhs/geometry.hpp"
#include "dhs/report.hpp"
#include "dhs/spectrum.hpp"

using namespace dhs;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("curvature correction term") {
    CHECK(phi(1.0, 2.0, 2, 0) == 0.0);
    CHECK(phi(-5.0, 123.0, 7, 0) == 0.0); // p = 0 short-circuits any input
    CHECK(phi(1.0, 2.0, 2, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(phi(1.0, 3.0, 3, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    // clamp just below zero is fine, beyond tolerance is a geometry error
    CHECK_NOTHROW(phi(0.5, 1.0 - 1e-13, 2, 1));
    CHECK_THROWS_AS(phi(0.5, 1.0 + 1e-9, 2, 1), GeometryError);
    CHECK_THROWS_AS(phi(1.0, 1.0, 2, 3), DimensionError);
}

TEST_CASE("geometric max term on analytic backends") {
    auto s2 = sphere_backend(2, 3, 2);
    auto g0 = geometric_term(s2, 0);
    CHECK(g0.g == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g0.min_xsq == doctest::Approx(2.0).epsilon(1e-12));

    // p=1: |H||h| = sqrt(2), Phi = 1/2, |x|^2/4 = 1/2
    auto g1 = geometric_term(s2, 1);
    CHECK(g1.g == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));

    // p=2: 2 sqrt(2) - Phi(1,2,2,2) - 1/2 with Phi = -(4(-1/2) + sqrt(2)/2 * 3)
    double phi22 = -(4.0 * ((-3.0 / 4.0) * 2.0 + 1.0) + 0.5 * std::sqrt(2.0) * 3.0);
    auto g2 = geometric_term(s2, 2);
    CHECK(g2.g == doctest::Approx(2.0 * std::sqrt(2.0) - phi22 - 0.5).epsilon(1e-12));

    auto s3 = sphere_backend(3, 4, 0);
    CHECK(geometric_term(s3, 0).g == doctest::Approx(-0.75).epsilon(1e-12));

    auto c = sphere_backend(1, 2, 64);
    CHECK(geometric_term(c, 1).g == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(geometric_term(c, 0).g == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("geometric right-hand side values") {
    CHECK(rhs_geometric(0.0, 2, 0, -0.5) == doctest::Approx(6.0));
    CHECK(rhs_geometric(1.0, 2, 1, std::sqrt(2.0) - 1.0) ==
          doctest::Approx(4.0 + 8.0 + 4.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
    CHECK(rhs_geometric(0.0, 1, 1, 0.75) == doctest::Approx(9.0));
    // bound collapses to m when G = -(m+4)/4
    for (int m : {1, 2, 3, 5})
        CHECK(lp_bound(0.0, m, 0, -(m + 4.0) / 4.0) == doctest::Approx(double(m)).epsilon(1e-13));
}

TEST_CASE("exact right-hand side, closed form") {
    auto s2 = sphere_backend(2, 3, 2);
    for (double lam : {0.0, 1.0, 3.0}) {
        CHECK(rhs_exact_closed_form(lam, s2, 0) == doctest::Approx(4 * lam + 2).epsilon(1e-13));
        CHECK(rhs_exact_closed_form(lam, s2, 2) == doctest::Approx(4 * lam + 2).epsilon(1e-13));
    }
    auto circle = sphere_backend(1, 2, 64);
    CHECK(rhs_exact_closed_form(0.0, circle, 1) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rhs_exact_closed_form(1.0, circle, 0) == doctest::Approx(5.0).epsilon(1e-13));
    auto s3 = sphere_backend(3, 4, 0);
    CHECK(rhs_exact_closed_form(1.0, s3, 3) == doctest::Approx(7.0).epsilon(1e-13));

    // S^2(sqrt 2) p=1: Ric acts as c p(m-p) = 1/2, so D = 4 lambda + 4 - 2 - 2
    CHECK(rhs_exact_closed_form(1.0, s2, 1) == doctest::Approx(4.0).epsilon(1e-12));

    auto mesh = backend_from_surface(icosphere(std::sqrt(2.0), 2));
    CHECK_THROWS_AS(rhs_exact_closed_form(0.0, mesh, 0), CapabilityError);
}

TEST_CASE("exact right-hand side via quadrature matches closed form") {
    // analytic sphere grid: cell points sit on the manifold, so the quadrature
    // reproduces 4 lambda + m exactly for the discrete eigenvalues
    auto bk = sphere_backend(2, 3, 3);
    auto cx = build_complex(bk);
    auto [K, M] = hodge_laplacian(cx, 0);
    auto sp = solve_spectrum(K, M, 9);
    for (int i = 1; i <= 9; ++i) {
        double want = 4.0 * sp.eigenvalues[i - 1] + 2.0;
        CHECK(rhs_exact(sp, bk, cx, i) == doctest::Approx(want).epsilon(1e-11));
    }

    auto circle = sphere_backend(1, 2, 48);
    auto ccx = build_complex(circle);
    auto [K1, M1] = hodge_laplacian(ccx, 1);
    auto sp1 = solve_spectrum(K1, M1, 5);
    sp1.degree = 1;
    for (int i = 1; i <= 5; ++i)
        CHECK(rhs_exact(sp1, circle, ccx, i) ==
              doctest::Approx(4.0 * sp1.eigenvalues[i - 1] + 1.0).epsilon(1e-11));

    CHECK_THROWS_AS(rhs_exact(sp, bk, cx, 0), InputError);
    CHECK_THROWS_AS(rhs_exact(sp, bk, cx, 10), InputError);
}

TEST_CASE("exact mode on estimated geometry is refused for p >= 1") {
    auto mesh = backend_from_surface(icosphere(std::sqrt(2.0), 2));
    auto cx = build_complex(mesh);
    auto [K, M] = hodge_laplacian(cx, 1);
    auto sp = solve_spectrum(K, M, 4);
    sp.degree = 1;
    CHECK_THROWS_AS(rhs_exact(sp, mesh, cx, 1), CapabilityError);

    // p = 0 carries no curvature action and stays available on meshes
    auto [K0, M0] = hodge_laplacian(cx, 0);
    auto sp0 = solve_spectrum(K0, M0, 4);
    double d1 = rhs_exact(sp0, mesh, cx, 1);
    CHECK(d1 == doctest::Approx(2.0).epsilon(5e-3)); // 4*0 + 4 - ~2
}

TEST_CASE("yang quadratic root") {
    CHECK(yang_bound(vec({0.0}), vec({2.0}), 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(yang_bound(vec({0.0, 1.0, 1.0, 1.0}), vec({2.0, 6.0, 6.0, 6.0}), 2) ==
          doctest::Approx(3.0).epsilon(1e-14));
    CHECK(yang_bound(vec({0.0}), vec({0.0}), 3) == doctest::Approx(0.0));
    CHECK_THROWS_AS(yang_bound(vec({1.0, 0.0}), vec({1.0, 1.0}), 2), InputError);
    CHECK_THROWS_AS(yang_bound(vec({0.0, 1.0}), vec({-3.0, 3.0}), 1), InputError);
    CHECK_THROWS_AS(yang_bound(vec({0.0}), vec({1.0, 2.0}), 2), InputError);
}

TEST_CASE("yang slack: equality cases, linearity, root consistency") {
    auto sp = analytic_sphere_spectrum(2, 0, 6);
    Eigen::VectorXd D(4);
    for (int i = 0; i < 4; ++i) D[i] = 4.0 * sp.eigenvalues[i] + 2.0;
    CHECK(yang_check(sp.eigenvalues, D, 2, 4) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(yang_check(vec({0.0, 1.0}), vec({1.0}), 1, 1) == doctest::Approx(0.0));

    // slack is linear in D with coefficient sum(lambda_{k+1} - lambda_i)
    Eigen::VectorXd D10 = D.array() + 10.0;
    double gap_sum = (sp.eigenvalues[4] - sp.eigenvalues.head(4).array()).sum();
    CHECK(yang_check(sp.eigenvalues, D10, 2, 4) - yang_check(sp.eigenvalues, D, 2, 4) ==
          doctest::Approx(10.0 * gap_sum).epsilon(1e-13));

    // the root returned by yang_bound sits on the equality locus
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        int k = 1 + int(rng() % 6);
        Eigen::VectorXd lams(k), Dr(k);
        for (int i = 0; i < k; ++i) lams[i] = unif(rng);
        std::sort(lams.data(), lams.data() + k);
        // D_i >= m(lambda_k - lambda_i) keeps the quadratic feasible at lambda_k
        for (int i = 0; i < k; ++i) Dr[i] = 2.0 * (lams[k - 1] - lams[i]) + 0.1 + unif(rng);
        double root = yang_bound(lams, Dr, 2);
        Eigen::VectorXd ext(k + 1);
        ext.head(k) = lams;
        ext[k] = root;
        double scale = std::abs(root) + lams.cwiseAbs().maxCoeff() + 1.0;
        CHECK(std::abs(yang_check(ext, Dr, 2, k)) <= 1e-10 * scale * scale);
    }

    // monotone in each D entry
    Eigen::VectorXd base = vec({0.0, 1.0, 1.0}), Db = vec({2.0, 6.0, 6.0});
    double b0 = yang_bound(base, Db, 2);
    for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd Dj = Db;
        Dj[j] += 0.1;
        CHECK(yang_bound(base, Dj, 2) >= b0 - 1e-14);
    }

    // shifting every eigenvalue with D held fixed shifts the root by the same amount
    double s = 0.7;
    Eigen::VectorXd shifted = base.array() + s;
    CHECK(yang_bound(shifted, Db, 2) == doctest::Approx(b0 + s).epsilon(1e-12));
}

TEST_CASE("gap bound formula and equality ladder") {
    CHECK(gap_bound(vec({0.0}), 2, -0.5) == doctest::Approx(1.0).epsilon(1e-14));
    for (int m : {1, 2, 3, 6})
        CHECK(gap_bound(vec({0.0}), m, 0.0) == doctest::Approx(4.0 / m).epsilon(1e-14));
    CHECK(gap_bound(vec({0.0, 1.0, 1.0, 1.0}), 2, -0.5) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(gap_bound(vec({0.0, 10.0}), 2, -0.5), InputError);

    // with the uniform constant from the exact D (c = m/4, G = c-1) the bound
    // is tight exactly at eigenvalue cluster boundaries
    auto sp2 = analytic_sphere_spectrum(2, 0, 55);
    for (int k : {1, 4, 9, 16, 25, 36, 49}) {
        double b = gap_bound(sp2.eigenvalues.head(k), 2, 2.0 / 4.0 - 1.0);
        CHECK(b == doctest::Approx(sp2.eigenvalues[k] - sp2.eigenvalues[k - 1]).epsilon(1e-12));
    }
    auto sp3 = analytic_sphere_spectrum(3, 0, 55);
    for (int k : {1, 5, 14, 30}) {
        double b = gap_bound(sp3.eigenvalues.head(k), 3, 3.0 / 4.0 - 1.0);
        CHECK(b == doctest::Approx(sp3.eigenvalues[k] - sp3.eigenvalues[k - 1]).epsilon(1e-12));
    }
}

TEST_CASE("levitin-parnovski slack") {
    auto sp = analytic_sphere_spectrum(2, 0, 5);
    CHECK(lp_check(sp.eigenvalues, 2.0, 2, 1) == doctest::Approx(0.0));
    auto c = analytic_sphere_spectrum(1, 0, 3);
    CHECK(lp_check(c.eigenvalues, 1.0, 1, 1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(lp_check(sp.eigenvalues, 2.0, 2, 4), InputError);
    CHECK_THROWS_AS(lp_check(sp.eigenvalues, 2.0, 2, 0), InputError);
}

TEST_CASE("growth bound") {
    CHECK(cheng_yang_bound(1.5, 2, 1) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(cheng_yang_bound(1.5, 2, 4) == doctest::Approx(18.0).epsilon(1e-14));
    CHECK_THROWS_AS(cheng_yang_bound(0.0, 2, 1), InputError);
    CHECK_THROWS_AS(cheng_yang_bound(-1.0, 2, 1), InputError);
    // k=1 bound shrinks toward mu_1 as m grows
    double prev = cheng_yang_bound(1.0, 1, 1);
    for (int m : {2, 4, 8, 64}) {
        double b = cheng_yang_bound(1.0, m, 1);
        CHECK(b < prev);
        CHECK(b > 1.0);
        prev = b;
    }
}

TEST_CASE("classical audit checks") {
    CHECK(classical_checks(vec({1.0, 2.0}), 1, 1).ppw == doctest::Approx(3.0));
    CHECK(classical_checks(vec({1.0, 5.0}), 1, 1).yang == doctest::Approx(0.0));
    CHECK(classical_checks(vec({1.0, 2.0, 3.0}), 2, 2).hp == doctest::Approx(1.5));
    CHECK(std::isinf(classical_checks(vec({1.0, 2.0, 2.0}), 2, 2).hp));
    CHECK_THROWS_AS(classical_checks(vec({0.0, 1.0}), 2, 1), InputError);
}

TEST_CASE("dominance: geometric rhs never undercuts the exact one") {
    auto s2 = sphere_backend(2, 3, 2);
    auto circle = sphere_backend(1, 2, 64);
    auto s3 = sphere_backend(3, 4, 0);
    for (double lam : {0.0, 0.5, 1.0, 3.0, 7.5}) {
        for (int p : {0, 1, 2}) {
            double g = geometric_term(s2, p).g;
            CHECK(rhs_geometric(lam, 2, p, g) >= rhs_exact_closed_form(lam, s2, p) - 1e-8);
        }
        for (int p : {0, 1}) {
            double g = geometric_term(circle, p).g;
            CHECK(rhs_geometric(lam, 1, p, g) >= rhs_exact_closed_form(lam, circle, p) - 1e-8);
        }
        for (int p : {0, 3}) {
            double g = geometric_term(s3, p).g;
            CHECK(rhs_geometric(lam, 3, p, g) >= rhs_exact_closed_form(lam, s3, p) - 1e-8);
        }
    }
}

TEST_CASE("full suite on analytic spectra, k and i up to 50") {
    struct Case {
        int m, p;
    };
    for (Case c : {Case{2, 0}, Case{2, 2}, Case{3, 0}, Case{3, 3}, Case{1, 0}, Case{1, 1}}) {
        CAPTURE(c.m);
        CAPTURE(c.p);
        auto bk = sphere_backend(c.m, c.m + 1, c.m == 2 ? 2 : (c.m == 1 ? 64 : 0));
        auto sp = analytic_sphere_spectrum(c.m, c.p, 53);
        SuiteOptions opt;
        opt.mode = RhsMode::exact;
        auto report = bound_suite(sp, bk, nullptr, opt);
        for (const auto& row : report.rows) {
            CAPTURE(row.inequality);
            CAPTURE(row.index);
            CHECK(row.slack >= -1e-9);
            CHECK(row.pass);
        }
        CHECK(report.all_pass());
        CHECK(report.provenance.curvature_term_factor == 4);

        // geometric mode also passes: the uniform constant only grows
        opt.mode = RhsMode::geometric;
        auto geo = bound_suite(sp, bk, nullptr, opt);
        CHECK(geo.all_pass());
    }
}

TEST_CASE("suite equality rows on the m=2 sphere") {
    auto bk = sphere_backend(2, 3, 2);
    auto sp = analytic_sphere_spectrum(2, 0, 11);
    SuiteOptions opt;
    opt.k_max = 10;
    auto report = bound_suite(sp, bk, nullptr, opt);
    int exact_hits = 0;
    for (const auto& row : report.rows) {
        if (row.inequality == "yang" && (row.index == 1 || row.index == 4)) {
            CHECK(std::abs(row.slack) <= 1e-9);
            ++exact_hits;
        }
        if (row.inequality == "gap" && (row.index == 1 || row.index == 4 || row.index == 9)) {
            CHECK(std::abs(row.slack) <= 1e-9);
            ++exact_hits;
        }
        if (row.inequality == "levitin-parnovski" && row.index == 1) {
            CHECK(std::abs(row.slack) <= 1e-9);
            ++exact_hits;
        }
        if (row.inequality == "cheng-yang" && row.index == 1) {
            CHECK(std::abs(row.slack) <= 1e-9);
            ++exact_hits;
        }
    }
    CHECK(exact_hits == 7);
}

TEST_CASE("suite flags an inflated eigenvalue") {
    auto sp = analytic_sphere_spectrum(2, 0, 5);
    sp.eigenvalues[4] *= 2.0; // still sorted: [0,1,1,1,6]
    auto bk = sphere_backend(2, 3, 2);
    auto report = bound_suite(sp, bk, nullptr, {});
    CHECK_FALSE(report.all_pass());
    bool saw_negative = false;
    for (const auto& row : report.rows)
        if (row.inequality == "yang" && row.index == 4) {
            CHECK(row.slack == doctest::Approx(-3.0).epsilon(1e-12));
            saw_negative = true;
        }
    CHECK(saw_negative);
}

TEST_CASE("suite on a discrete mesh spectrum in geometric mode") {
    auto bk = backend_from_surface(icosphere(std::sqrt(2.0), 3));
    auto cx = build_complex(bk);
    auto [K, M] = hodge_laplacian(cx, 0);
    auto sp = solve_spectrum(K, M, 17);
    SuiteOptions opt;
    opt.mode = RhsMode::geometric;
    opt.k_max = 16;
    auto report = bound_suite(sp, bk, &cx, opt);
    CHECK(report.all_pass());
    // estimated curvature on the shrinker sphere keeps G near -m/4
    CHECK(report.provenance.g == doctest::Approx(-0.5).epsilon(2e-2));

    // exact mode works for p=0 on meshes too (no curvature action on scalars);
    // the continuum inequalities then hold up to discretization error, so only
    // the sign is asserted, loosely
    opt.mode = RhsMode::exact;
    auto exact = bound_suite(sp, bk, &cx, opt);
    CHECK(exact.rows.size() == report.rows.size());
    for (const auto& row : exact.rows) {
        CAPTURE(row.inequality);
        CAPTURE(row.index);
        CHECK(row.slack >= -0.05);
    }
}

TEST_CASE("report serialization") {
    auto bk = sphere_backend(2, 3, 2);
    auto sp = analytic_sphere_spectrum(2, 0, 6);
    SuiteOptions opt;
    opt.k_max = 5;
    opt.classical = true; // skipped silently: spectrum starts at zero
    auto report = bound_suite(sp, bk, nullptr, opt);

    auto csv = bound_report_csv(report);
    CHECK(csv.rfind("inequality,p,index,bound,observed,slack,pass,mode\n", 0) == 0);
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == report.rows.size() + 1);
    CHECK(csv.find("yang,0,1,") != std::string::npos);
    CHECK(csv.find(",true,exact-integral") != std::string::npos);

    auto j = nlohmann::json::parse(bound_report_json(report));
    CHECK(j["provenance"]["m"] == 2);
    CHECK(j["provenance"]["curvature_term_factor"] == 4);
    CHECK(j["provenance"]["c0"] == "1+4/m");
    CHECK(j["all_pass"] == true);
    CHECK(j["rows"].size() == report.rows.size());
    CHECK(j["rows"][0]["inequality"] == "yang");
    CHECK(j["rows"][0]["index"] == 1);
    CHECK(j["rows"][0]["pass"] == true);

    // audit rows appear for strictly positive spectra and never affect all_pass
    Spectrum shifted = sp;
    shifted.eigenvalues.array() += 1.0;
    auto audited = bound_suite(shifted, bk, nullptr, opt);
    bool has_audit = false;
    for (const auto& row : audited.rows)
        if (row.mode == "audit") has_audit = true;
    CHECK(has_audit);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ltb/frw.hpp"
#include "oracles.hpp"

using namespace ltb;

TEST_CASE("parametric scale factor", "[frw]") {
    auto g = oracle::rng(2);
    for (int i = 0; i < 20; ++i) {
        const double c = oracle::uniform(g, 0.2, 2.5);
        const FrwParams p(c, 1.0);
        CHECK(scale_factor_param(0.0, p) == Catch::Approx(c).epsilon(1e-15));
        // c = 1: F(eta) = (3/2) cosh - 1/2 + sqrt2 sinh
        const double eta = oracle::uniform(g, -0.3, 2.0);
        const FrwParams p1(1.0, 1.0);
        CHECK(scale_factor_param(eta, p1) ==
              Catch::Approx(1.5 * std::cosh(eta) - 0.5 + std::sqrt(2.0) * std::sinh(eta))
                  .epsilon(1e-14));
        // parametric identity F'^2 = F^2 + F
        const double F = scale_factor_param(eta, p);
        const double Fp = scale_factor_param_deriv(eta, p);
        CHECK(std::abs(Fp * Fp - F * F - F) < 1e-10 * (1.0 + F * F));
    }
}

TEST_CASE("time parametrization per convention", "[frw]") {
    const double c = 0.8;
    const FrwParams paper(c, 1.0, Convention::paper_sqrt2);
    const FrwParams cons(c, 1.0, Convention::constraint_consistent);
    CHECK(time_param(0.0, paper) == Catch::Approx(std::sqrt(2.0) * paper.k_c).epsilon(1e-15));
    CHECK(time_param(0.0, cons) == Catch::Approx(cons.k_c).epsilon(1e-15));

    // dG/deta = sqrt2 F under the printed convention (finite-difference check),
    // and the printed G is exactly sqrt2 times the rescaled one
    for (double eta : {-0.2, 0.3, 1.1, 2.0}) {
        const double fd = oracle::central_diff([&](double e) { return time_param(e, paper); }, eta);
        CHECK(fd == Catch::Approx(std::sqrt(2.0) * scale_factor_param(eta, paper)).epsilon(1e-9));
        CHECK(time_param(eta, paper) ==
              Catch::Approx(std::sqrt(2.0) * time_param(eta, cons)).epsilon(1e-14));
    }
}

TEST_CASE("scale factor inversion round trip", "[frw]") {
    const FrwParams p(1.3, 2.0);
    for (double eta : {-0.4, -0.1, 0.0, 0.5, 1.5, 3.0}) {
        const double a = scale_factor_param(eta, p);
        CHECK(invert_scale_factor(a, p) == Catch::Approx(eta).margin(1e-10));
    }
}

TEST_CASE("convention audit", "[frw]") {
    std::vector<double> grid;
    for (double eta = -0.5; eta <= 2.5; eta += 0.05) grid.push_back(eta);

    const FrwParams cons(0.9, 1.0, Convention::constraint_consistent);
    const ConventionAudit a1 = audit_convention(cons, grid);
    CHECK(a1.verdict);
    CHECK(a1.max_constraint_residual <= 1e-10);

    const FrwParams paper(0.9, 1.0, Convention::paper_sqrt2);
    const ConventionAudit a2 = audit_convention(paper, grid);
    CHECK(a2.verdict); // residual equals -(1+1/a)/2 to within tolerance
    CHECK(a2.max_constraint_residual > 0.5);
    CHECK(a2.max_expected_deviation <= 1e-10);
}

TEST_CASE("closed solution at the anchor point", "[frw]") {
    LuminosityCurve curve(CosmoParams{0.3});
    const FrwParams p(0.7, 1.5);
    const FrwState s = closed_solution(p.z0, p, curve);
    CHECK(s.a == Catch::Approx(p.c).epsilon(1e-14));
    CHECK(s.t == Catch::Approx(reference_time(p)).margin(1e-11));
    CHECK(s.r == Catch::Approx(curve.R(p.z0) / p.c).epsilon(1e-12));
    CHECK(s.M == Catch::Approx(0.5 * std::pow(curve.R(p.z0) / p.c, 3)).epsilon(1e-12));

    // omega = 1: r(z) = z/((1+z0) c); a strictly decreasing
    LuminosityCurve flat(CosmoParams{1.0});
    const FrwParams pf(1.0, 1.0);
    double prev_a = 1e300;
    for (double z = 0.5; z <= 3.0; z += 0.25) {
        const FrwState f = closed_solution(z, pf, flat);
        CHECK(f.r == Catch::Approx(z / ((1.0 + pf.z0) * pf.c)).epsilon(1e-12));
        CHECK(f.a < prev_a);
        prev_a = f.a;
        CHECK(f.a * (1.0 + z) == Catch::Approx(pf.c * (1.0 + pf.z0)).epsilon(1e-14));
    }
}

TEST_CASE("closed solution time derivative matches -a/((1+z) adot)", "[frw]") {
    LuminosityCurve curve(CosmoParams{0.4});
    const FrwParams p(0.9, 1.0);
    for (double z : {1.1, 1.6, 2.3}) {
        const double fd =
            oracle::central_diff([&](double zz) { return closed_solution(zz, p, curve).t; }, z, 1e-6);
        const double a = scale_factor_of_z(z, p);
        const double adot = std::sqrt(1.0 + 1.0 / a); // constraint-consistent
        CHECK(fd == Catch::Approx(-a / ((1.0 + z) * adot)).epsilon(1e-7));
    }
}

TEST_CASE("c_lambda closed form and mass-shell coincidence", "[frw]") {
    CHECK(c_lambda(CosmoParams{0.0}, 1.0) == Catch::Approx(0.5).epsilon(1e-12));
    for (double z0 : {0.5, 1.0, 2.0})
        CHECK(c_lambda(CosmoParams{0.0}, z0) == Catch::Approx(1.0 / (1.0 + z0)).epsilon(1e-12));

    // with c = c_lambda, R[z_lambda] = 2 M[z_lambda] along the closed solution
    const CosmoParams cosmo{0.5};
    LuminosityCurve curve(cosmo);
    const double cl = c_lambda(cosmo, 1.0);
    const FrwParams p(cl, 1.0);
    const double zl = find_z_lambda(cosmo).z_lambda;
    const FrwState s = closed_solution(zl, p, curve);
    CHECK(std::abs(curve.R(zl) - 2.0 * s.M) < 1e-10);
}

TEST_CASE("energy density two routes", "[frw]") {
    LuminosityCurve curve(CosmoParams{0.25});
    const FrwParams p(0.8, 1.0);
    CHECK(energy_density(p.z0, p, curve) == Catch::Approx(1.5 / std::pow(p.c, 3)).epsilon(1e-13));
    for (double z : {1.0, 1.5, 2.5, 4.0}) {
        const double a = scale_factor_of_z(z, p);
        CHECK(energy_density(z, p, curve) * a * a * a == Catch::Approx(1.5).epsilon(1e-13));
        CHECK(energy_density_raw(z, p, curve) ==
              Catch::Approx(energy_density(z, p, curve)).epsilon(1e-12));
    }
}

TEST_CASE("regularized quotient", "[frw]") {
    const CosmoParams cosmo{0.0};
    LuminosityCurve curve(cosmo);
    const double z0 = 1.0;
    const double cl = c_lambda(cosmo, z0);
    const FrwParams p(cl, z0);
    const double zl = find_z_lambda(cosmo).z_lambda;

    // limit value = -R_zz/(2 M_z) at z_lambda, computed from the curve derivatives
    const double kap = cl * (1.0 + z0);
    const double r = curve.integral(zl) / kap;
    const double Mz = 1.5 * r * r * integrand(1.0 + zl, cosmo) / kap;
    const double expected = -curve.d2Rdz2(zl) / (2.0 * Mz);
    CHECK(regularized_quotient(zl, p, curve) == Catch::Approx(expected).epsilon(1e-12));
    // at omega = 0 the limit evaluates to 1/(2 (1+z_lambda)) = 1/4.5
    CHECK(regularized_quotient(zl, p, curve) == Catch::Approx(1.0 / 4.5).epsilon(1e-10));

    // continuity at the switch boundary, both sides
    const double hsw = 1e-5 * (1.0 + zl);
    for (double side : {-1.0, 1.0}) {
        const double z_in = zl + side * hsw * 0.999999;
        const double z_out = zl + side * hsw * 1.000001;
        CHECK(std::abs(regularized_quotient(z_in, p, curve) -
                       regularized_quotient(z_out, p, curve)) < 1e-8);
    }
    // positive on a neighborhood
    for (double dz = -0.05; dz <= 0.05; dz += 0.005)
        CHECK(regularized_quotient(zl + dz, p, curve) > 0.0);

    // not removable away from c_lambda
    const FrwParams off(1.3 * cl, z0);
    CHECK_THROWS_AS(regularized_quotient(zl, off, curve), QuotientNotRemovable);
}

TEST_CASE("rationalized time equation equals the geodesic form away from z_lambda", "[frw]") {
    const CosmoParams cosmo{0.0};
    LuminosityCurve curve(cosmo);
    const double cl = c_lambda(cosmo, 1.0);
    const FrwParams p(cl, 1.0);
    for (double z : {1.05, 1.1, 1.35, 1.45}) {
        const FrwState s = closed_solution(z, p, curve);
        const double R = curve.R(z);
        const double E = 0.5 * s.r * s.r;
        const double denom_geo = std::sqrt(2.0 * E + 2.0 * s.M / R) - std::sqrt(1.0 + 2.0 * E);
        const double direct = curve.dRdz(z) / denom_geo;
        const double rationalized =
            -rationalized_H(z, p, curve) * (-curve.dRdz(z) / (2.0 * s.M - R));
        CHECK(rationalized == Catch::Approx(direct).epsilon(1e-11));
    }
}

TEST_CASE("crossing with c = c_lambda is smooth through z_lambda", "[frw]") {
    const CosmoParams cosmo{0.0};
    LuminosityCurve curve(cosmo);
    const double z0 = 1.0;
    const FrwParams p(c_lambda(cosmo, z0), z0);
    IvpSpec spec;
    spec.rel_tol = 1e-11;
    spec.abs_tol = 1e-13;
    const CrossingResult res = cross_singularity(p, curve, z0, 1.5, spec);
    CHECK(res.regularized);
    CHECK(res.crossed);
    const double zl = res.z_lambda;
    CHECK(zl == Catch::Approx(1.25).margin(1e-9));

    // C1 smoothness: one-sided derivative estimates straddling z_lambda
    const double h = 1e-6;
    const double left = (res.t_at(zl) - res.t_at(zl - h)) / h;
    const double right = (res.t_at(zl + h) - res.t_at(zl)) / h;
    CHECK(std::abs(right - left) <= 1e-6);
    // dt/dz stays negative through the crossing (look-back time)
    for (double z = z0 + 0.01; z < 1.5; z += 0.02)
        CHECK(res.t_at(z + 0.005) < res.t_at(z));
}

TEST_CASE("crossing without the critical redshift in range stays unregularized", "[frw]") {
    const CosmoParams cosmo{0.0};
    LuminosityCurve curve(cosmo);
    const FrwParams p(c_lambda(cosmo, 1.0), 1.0);
    const CrossingResult res = cross_singularity(p, curve, 1.0, 1.2);
    CHECK_FALSE(res.regularized);
    CHECK(res.crossed);
}

TEST_CASE("crossing with c != c_lambda terminates at z_lambda with a first-order blow-up",
          "[frw]") {
    const CosmoParams cosmo{0.0};
    LuminosityCurve curve(cosmo);
    const double z0 = 1.0;
    const double cl = c_lambda(cosmo, z0);
    const FrwParams p(1.2 * cl, z0);
    IvpSpec spec;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-13;
    const CrossingResult res = cross_singularity(p, curve, z0, 1.5, spec);
    CHECK_FALSE(res.crossed);
    CHECK(res.z_stop == Catch::Approx(res.z_lambda).margin(1e-6));
    REQUIRE(res.blowup_exponent.has_value());
    CHECK(*res.blowup_exponent == Catch::Approx(-1.0).margin(0.1));
}

TEST_CASE("oracle comparison anchors at the initial point", "[frw]") {
    const CosmoParams cosmo{1.0};
    LuminosityCurve curve(cosmo);
    const FrwParams p(1.0, 1.0);
    IvpSpec spec;
    spec.rel_tol = 1e-9;
    spec.abs_tol = 1e-12;
    const OracleReport rep = oracle_compare(p, curve, 1.05, spec, 11);

    // the initial point itself deviates by construction-zero; the report is finite
    const FrwState init = closed_solution(p.z0, p, curve);
    const LtbModel model = frw_model(p.c, reference_time(p));
    const GeodesicTrace trace = trace_geodesic({p.z0, init.r, init.t, init.M}, curve, model, 1.05, spec);
    const auto y0 = trace.trajectory.nodes.front().y;
    CHECK(y0[0] == init.r);
    CHECK(y0[1] == init.t);
    CHECK(y0[2] == init.M);
    CHECK(std::isfinite(rep.max_rel_dev));
}

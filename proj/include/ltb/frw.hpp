#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ltb/critical.hpp"
#include "ltb/kernel.hpp"
#include "ltb/luminosity.hpp"
#include "ltb/numerics.hpp"

namespace ltb {

// ---------------------------------------------------------------------------
// Parametric solutions a(t) with E = r^2/2, M = r^3/2, R0 = c r
// ---------------------------------------------------------------------------

// Two time normalizations are supported. The printed parametric pair (with the sqrt2
// factors in G_c) yields (da/dt)^2 = (1 + 1/a)/2, i.e. it violates the constraint
// (Rdot/R)^2 = 2E/R^2 + 2M/R^3 by a factor 2. Rescaling time by sqrt2 repairs it;
// that is the constraint_consistent convention and the default. audit_convention
// measures the residual of both instead of silently altering either.
enum class Convention { paper_sqrt2, constraint_consistent };

struct FrwParams {
    double c;
    double k_c; // sqrt(c + c^2)
    double z0;
    Convention convention = Convention::constraint_consistent;

    FrwParams(double c_, double z0_, Convention conv = Convention::constraint_consistent)
        : c(c_), k_c(std::sqrt(c_ + c_ * c_)), z0(z0_), convention(conv) {
        if (!(c > 0) || !(z0 > 0)) throw std::invalid_argument("FrwParams: need c > 0 and z0 > 0");
    }
};

// F_c(eta) = (cosh eta - 1)/2 + c cosh eta + k_c sinh eta; strictly increasing for
// eta > -arctanh(2 k_c/(1+2c)).
inline double scale_factor_param(double eta, const FrwParams& p) {
    return 0.5 * (std::cosh(eta) - 1.0) + p.c * std::cosh(eta) + p.k_c * std::sinh(eta);
}

inline double scale_factor_param_deriv(double eta, const FrwParams& p) {
    return (p.c + 0.5) * std::sinh(eta) + p.k_c * std::cosh(eta);
}

inline double eta_invertible_floor(const FrwParams& p) {
    return -std::atanh(2.0 * p.k_c / (1.0 + 2.0 * p.c));
}

// G_c(eta) as printed (paper_sqrt2), or its sqrt2-rescaled antiderivative-of-F form
// (constraint_consistent), which satisfies dG/deta = F exactly.
inline double time_param(double eta, const FrwParams& p) {
    const double se = std::sinh(eta), ce = std::cosh(eta);
    if (p.convention == Convention::paper_sqrt2)
        return (se - eta) / std::sqrt(2.0) + std::sqrt(2.0) * (p.c * se + p.k_c * ce);
    return 0.5 * (se - eta) + p.c * se + p.k_c * ce;
}

inline double time_param_deriv(double eta, const FrwParams& p) {
    const double F = scale_factor_param(eta, p);
    return (p.convention == Convention::paper_sqrt2) ? std::sqrt(2.0) * F : F;
}

inline double reference_time(const FrwParams& p) { return time_param(0.0, p); }

// F_c^{-1} by bracketed root finding on the monotone range.
inline double invert_scale_factor(double a, const FrwParams& p, double tol = 1e-13) {
    if (!(a > 0)) throw EvaluationError("invert_scale_factor: a must be positive");
    const double floor_eta = eta_invertible_floor(p);
    const auto f = [&](double eta) { return scale_factor_param(eta, p) - a; };
    double lo, hi;
    if (a >= p.c) {
        lo = 0.0;
        hi = 1.0;
        while (f(hi) < 0) {
            hi *= 2.0;
            if (hi > 700.0) throw EvaluationError("invert_scale_factor: a out of range");
        }
    } else {
        hi = 0.0;
        lo = floor_eta * (1.0 - 1e-12) + 1e-300;
        if (f(lo) > 0) throw EvaluationError("invert_scale_factor: a below the invertible range");
    }
    return find_root_bracketed(f, lo, hi, tol);
}

// ---------------------------------------------------------------------------
// Convention audit against the constraint (adot)^2 = 1 + 1/a
// ---------------------------------------------------------------------------

struct ConventionAudit {
    Convention convention;
    double max_constraint_residual = 0.0;   // max |adot^2 - (1 + 1/a)|
    double max_expected_deviation = 0.0;    // distance from the convention's predicted residual
    bool verdict = false;
};

inline ConventionAudit audit_convention(const FrwParams& p, const std::vector<double>& eta_grid,
                                        double tol = 1e-10) {
    ConventionAudit audit;
    audit.convention = p.convention;
    for (double eta : eta_grid) {
        const double a = scale_factor_param(eta, p);
        if (!(a > 0)) continue;
        const double adot = scale_factor_param_deriv(eta, p) / time_param_deriv(eta, p);
        const double residual = adot * adot - (1.0 + 1.0 / a);
        const double expected =
            (p.convention == Convention::paper_sqrt2) ? -0.5 * (1.0 + 1.0 / a) : 0.0;
        audit.max_constraint_residual = std::max(audit.max_constraint_residual, std::abs(residual));
        audit.max_expected_deviation = std::max(audit.max_expected_deviation, std::abs(residual - expected));
    }
    audit.verdict = audit.max_expected_deviation <= tol;
    return audit;
}

// ---------------------------------------------------------------------------
// Closed solution driven by the data curve
// ---------------------------------------------------------------------------

struct FrwState {
    double r, t, M;
    double a; // a[z] = c (1+z0)/(1+z)
};

inline double scale_factor_of_z(double z, const FrwParams& p) {
    return p.c * (1.0 + p.z0) / (1.0 + z);
}

inline FrwState closed_solution(double z, const FrwParams& p, const LuminosityCurve& curve) {
    FrwState s;
    s.a = scale_factor_of_z(z, p);
    s.r = curve.integral(z) / ((1.0 + p.z0) * p.c);
    s.M = 0.5 * s.r * s.r * s.r;
    s.t = time_param(invert_scale_factor(s.a, p), p);
    return s;
}

// c making the critical redshift removable: R[z_lambda] = 2 M[z_lambda] for the closed
// solution built with c = c_lambda.
inline double c_lambda(const CosmoParams& p, double z0, double tol = 1e-12) {
    const double zl = find_z_lambda(p, tol).z_lambda; // throws NoCriticalPoint for omega = 1
    const double u = 1.0 + zl;
    return u / ((1.0 + z0) * std::cbrt(p.omega_lambda + (1.0 - p.omega_lambda) * u * u * u));
}

// rho[z] = 3/(2 a^3)
inline double energy_density(double z, const FrwParams& p, const LuminosityCurve&) {
    const double a = scale_factor_of_z(z, p);
    return 1.5 / (a * a * a);
}

// same density from the raw pieces M'(r)/(R^2 R') = (3 r^2/2)/(R[z]^2 a)
inline double energy_density_raw(double z, const FrwParams& p, const LuminosityCurve& curve) {
    const FrwState s = closed_solution(z, p, curve);
    const double R = curve.R(z);
    return (1.5 * s.r * s.r) / (R * R * s.a);
}

// ---------------------------------------------------------------------------
// Regularized quotient Q(z) = -R_z/(2M - R) and the crossing integration
// ---------------------------------------------------------------------------

struct QuotientNotRemovable : EvaluationError {
    QuotientNotRemovable() : EvaluationError("quotient not removable here (c != c_lambda)") {}
};

namespace detail {
struct QuotientSeries {
    double z_lambda;
    double Q0, Q1; // Q(z_lambda) and its first derivative
};

// Series coefficients from the analytic derivatives of numerator N = -R_z and
// denominator D = 2M - R, both of which vanish to first order at z_lambda:
// Q0 = N'/D', Q1 = (N'' D' - N' D'')/(2 D'^2).
inline QuotientSeries quotient_series(const FrwParams& p, const LuminosityCurve& curve) {
    const CosmoParams cosmo = curve.params();
    const double zl = find_z_lambda(cosmo).z_lambda;
    const double kap = p.c * (1.0 + p.z0);
    const double r = curve.integral(zl) / kap;
    const double rz = integrand(1.0 + zl, cosmo) / kap;
    const double rzz = integrand_deriv(1.0 + zl, cosmo) / kap;
    const double Mz = 1.5 * r * r * rz;
    const double Mzz = 3.0 * r * rz * rz + 1.5 * r * r * rzz;
    const double n1 = -curve.d2Rdz2(zl);
    const double n2 = -curve.d3Rdz3(zl);
    const double d1 = 2.0 * Mz;
    const double d2 = 2.0 * Mzz - curve.d2Rdz2(zl);
    return {zl, n1 / d1, (n2 * d1 - n1 * d2) / (2.0 * d1 * d1)};
}
} // namespace detail

// Plain quotient away from z_lambda; within |z - z_lambda| <= h_switch the value comes
// from the series anchored at the removable-limit value Q(z_lambda) = -R_zz/(2 M_z)
// with the linear correction. Default h_switch keeps the series truncation and the
// direct quotient's cancellation error both below 1e-9 at the boundary.
inline double regularized_quotient(double z, const FrwParams& p, const LuminosityCurve& curve,
                                   std::optional<double> h_switch = {}) {
    const double cl = c_lambda(curve.params(), p.z0);
    if (std::abs(p.c - cl) > 1e-8 * (1.0 + cl)) throw QuotientNotRemovable();
    const auto series = detail::quotient_series(p, curve);
    const double hsw = h_switch ? *h_switch : 1e-5 * (1.0 + series.z_lambda);
    if (std::abs(z - series.z_lambda) <= hsw)
        return series.Q0 + series.Q1 * (z - series.z_lambda);
    const FrwState s = closed_solution(z, p, curve);
    return -curve.dRdz(z) / (2.0 * s.M - curve.R(z));
}

// H(z) = R (sqrt(2E + 2M/R) + sqrt(1+2E)) from rationalizing dt/dz of the geodesic
// system; along the closed states dt/dz = -H(z) Q(z).
inline double rationalized_H(double z, const FrwParams& p, const LuminosityCurve& curve) {
    const FrwState s = closed_solution(z, p, curve);
    const double R = curve.R(z);
    const double E = 0.5 * s.r * s.r;
    return R * (std::sqrt(2.0 * E + 2.0 * s.M / R) + std::sqrt(1.0 + 2.0 * E));
}

struct CrossingResult {
    Trajectory<1> t_traj; // state = (t)
    bool crossed = false; // reached the end of the range
    double z_stop = 0.0;
    bool regularized = false;
    std::optional<double> blowup_exponent; // fitted slope of ln |adot[z]| vs ln |z - z_lambda|
    double z_lambda = 0.0;

    double t_at(double z) const { return t_traj.eval(z)[0]; }
};

// Integrates dt/dz = -H(z) Q(z) over [z_lo, z_hi] along the closed-form r(z), M(z).
// With c = c_lambda and the range containing z_lambda, the regularized quotient carries
// the integration smoothly across; otherwise the run terminates at the critical
// redshift (R_z = 0) or at a mass-shell crossing (2M - R = 0), whichever comes first,
// and the order of the da/dt blow-up is fitted on the approach.
inline CrossingResult cross_singularity(const FrwParams& p, const LuminosityCurve& curve,
                                        double z_lo, double z_hi, const IvpSpec& spec = {}) {
    CrossingResult res;
    const CosmoParams cosmo = curve.params();
    const double zl = find_z_lambda(cosmo).z_lambda;
    res.z_lambda = zl;
    const double cl = c_lambda(cosmo, p.z0);
    const bool removable = std::abs(p.c - cl) <= 1e-8 * (1.0 + cl);
    const bool contains_zl = (z_lo < zl && zl < z_hi);

    const double t0 = closed_solution(z_lo, p, curve).t;

    if (removable && contains_zl) {
        res.regularized = true;
        const auto rhs = [&](double z, const std::array<double, 1>&) -> std::array<double, 1> {
            return {-rationalized_H(z, p, curve) * regularized_quotient(z, p, curve)};
        };
        res.t_traj = solve_ivp<1>(rhs, {t0}, z_lo, z_hi, spec);
        res.crossed = res.t_traj.status == IvpStatus::reached_end;
        res.z_stop = res.t_traj.z_end();
        return res;
    }

    const auto rhs = [&](double z, const std::array<double, 1>&) -> std::array<double, 1> {
        const FrwState s = closed_solution(z, p, curve);
        const double denom = 2.0 * s.M - curve.R(z);
        if (denom == 0.0) throw SingularEvaluation(SingularKind::horizon, z);
        return {-rationalized_H(z, p, curve) * (-curve.dRdz(z) / denom)};
    };
    std::vector<EventSpec<1>> events;
    events.push_back({[&](double z, const std::array<double, 1>&) { return curve.dRdz(z); },
                      EventDirection::any, true, 1e-12});
    events.push_back({[&](double z, const std::array<double, 1>&) {
                          const FrwState s = closed_solution(z, p, curve);
                          return 2.0 * s.M - curve.R(z);
                      },
                      EventDirection::any, true, 1e-12});
    res.t_traj = solve_ivp<1>(rhs, {t0}, z_lo, z_hi, spec, events);
    res.crossed = res.t_traj.status == IvpStatus::reached_end;
    res.z_stop = res.t_traj.z_end();

    const bool stopped_at_zl = !res.crossed && std::abs(res.z_stop - zl) < 1e-6 * (1.0 + zl);
    if (stopped_at_zl) {
        // order of the singularity in da/dt = a_z / (dt/dz); a_z is smooth and nonzero
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (double eps = 1e-7 * (1.0 + zl); eps < 1e-3 * (1.0 + zl); eps *= 2.0) {
            const double z = zl - eps;
            if (z <= z_lo) break;
            const double dt = rhs(z, {0.0})[0];
            const double a = scale_factor_of_z(z, p);
            const double az = -a / (1.0 + z);
            const double x = std::log(eps), y = std::log(std::abs(az / dt));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++m;
        }
        if (m >= 2) res.blowup_exponent = (sxy - sx * sy / m) / (sxx - sx * sx / m);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Oracle comparison: general system vs closed forms
// ---------------------------------------------------------------------------

struct OracleReport {
    double max_rel_dev_r = 0.0;
    double max_rel_dev_t = 0.0;
    double max_rel_dev_M = 0.0;
    double max_rel_dev = 0.0;
    IvpStatus status = IvpStatus::reached_end;
    double z_end = 0.0;
};

// Integrates the general geodesic system with the model E = r^2/2, R0 = c r,
// sigma = delta = +1 from the closed-form initial conditions at z_lo = z0, and reports
// the maximum relative deviation from the closed solution in (r, t, M).
inline OracleReport oracle_compare(const FrwParams& p, const LuminosityCurve& curve,
                                   double z_hi, const IvpSpec& spec = {},
                                   std::size_t n_samples = 101) {
    const LtbModel model = frw_model(p.c, reference_time(p));
    const FrwState init = closed_solution(p.z0, p, curve);
    const GeodesicState s0{p.z0, init.r, init.t, init.M};
    const GeodesicTrace trace = trace_geodesic(s0, curve, model, z_hi, spec);

    OracleReport rep;
    rep.status = trace.trajectory.status;
    rep.z_end = trace.trajectory.z_end();
    const double z0 = p.z0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double z = z0 + (rep.z_end - z0) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const auto y = trace.trajectory.eval(z);
        const FrwState ref = closed_solution(z, p, curve);
        const auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(std::abs(want), 1e-300);
        };
        rep.max_rel_dev_r = std::max(rep.max_rel_dev_r, rel(y[0], ref.r));
        rep.max_rel_dev_t = std::max(rep.max_rel_dev_t, rel(y[1], ref.t));
        rep.max_rel_dev_M = std::max(rep.max_rel_dev_M, rel(y[2], ref.M));
    }
    rep.max_rel_dev = std::max({rep.max_rel_dev_r, rep.max_rel_dev_t, rep.max_rel_dev_M});
    return rep;
}

} // namespace ltb

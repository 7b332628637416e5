#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ltb/certificate.hpp"
#include "ltb/critical.hpp"
#include "ltb/kernel.hpp"
#include "ltb/luminosity.hpp"
#include "ltb/numerics.hpp"

namespace ltb {

// Constant-E (E == 1) specialization: sigma = delta = 1 throughout this module.

struct DecoupledState {
    double z;
    double r;
    double t;
    double xi; // M/R
};

struct StraddlesCritical : EvaluationError {
    StraddlesCritical() : EvaluationError("interval straddles the critical redshift (R_z changes sign)") {}
};

namespace detail {
inline constexpr double sqrt3 = 1.7320508075688772;
inline constexpr double sqrt6 = 2.449489742783178;
}

// Delta_xi = sqrt3 - sqrt(2+2xi); vanishes at xi = 1/2.
inline double delta_xi(double xi) { return detail::sqrt3 - std::sqrt(2.0 + 2.0 * xi); }

struct J1J2Eval {
    double J1 = 0, J2 = 0;
    double J1_upper = 0;  // sqrt(h) / (2 R0' (1+xi))
    double J2_upper = 0;  // 1/R0'
    double mix = 0;       // J2 + xi J1
    double mix_upper = 0; // (1 + sqrt(h)/2) / R0'
    double h = 0, xi_sharp = 0;
};

namespace detail {
// int_1^h sqrt(nu/(nu+xi)) dnu/(nu+xi), oriented (negative for h < 1)
inline double j1_integral(double h, double xi, const QuadratureSpec& quad) {
    return integrate_adaptive(
        [xi](double nu) { return std::sqrt(nu / (nu + xi)) / (nu + xi); }, 1.0, h, quad);
}
} // namespace detail

// J1 = -G/F and J2 = 1/F in closed/quadrature form, with the chain of upper bounds.
// Requires the section hypotheses h >= 1 and R0' > 0.
inline J1J2Eval eval_J1_J2(const DecoupledState& s, const LuminosityCurve& curve,
                           const LtbModel& model, const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    const double R = curve.R(s.z);
    const double R0 = model.R0(s.r);
    const double R0p = model.R0prime(s.r);
    if (!(R0p > 0)) throw EvaluationError("eval_J1_J2: requires R0' > 0");
    const double h = R0 / R;
    if (h < 1.0) throw EvaluationError("eval_J1_J2: requires h >= 1 (t <= t0)");
    J1J2Eval e;
    e.h = h;
    e.xi_sharp = s.xi / h;
    e.J1 = std::sqrt(1.0 + e.xi_sharp) / (2.0 * R0p) * detail::j1_integral(h, s.xi, quad);
    e.J2 = std::sqrt((1.0 + e.xi_sharp) / (1.0 + s.xi)) / R0p;
    e.J1_upper = std::sqrt(h) / (2.0 * R0p * (1.0 + s.xi));
    e.J2_upper = 1.0 / R0p;
    e.mix = e.J2 + s.xi * e.J1;
    e.mix_upper = (1.0 + std::sqrt(h) / 2.0) / R0p;
    return e;
}

struct DecoupledRhs {
    double dr, dt, dxi;
};

// System with the xi-equation decoupled:
//   dxi/dz = sqrt6 sqrt(1+xi)/(1+z) + xi (R_z/R) sqrt3 sqrt(1+xi)/Delta_xi
//   dt/dz  = -R_z/Delta_xi
//   dr/dz  = R J1 sqrt6 sqrt(1+xi)/(1+z) + sqrt3 R_z (J2 + xi J1)/Delta_xi
// J1, J2 are evaluated with oriented integrals so states with h < 1 remain usable by
// the solver; the certified (18) bounds require h >= 1 and live in eval_J1_J2.
inline DecoupledRhs rhs_decoupled(const DecoupledState& s, const LuminosityCurve& curve,
                                  const LtbModel& model, double exclusion_band = 1e-6,
                                  const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    if (!(s.xi >= 0)) throw EvaluationError("rhs_decoupled: xi must be nonnegative");
    if (std::abs(2.0 * s.xi - 1.0) < exclusion_band)
        throw SingularEvaluation(SingularKind::geometric_denominator, s.z);
    const double R = curve.R(s.z);
    const double Rz = curve.dRdz(s.z);
    const double D = delta_xi(s.xi);
    const double sq1xi = std::sqrt(1.0 + s.xi);

    const double R0 = model.R0(s.r);
    const double R0p = model.R0prime(s.r);
    if (!(R0 > 0) || !(R0p > 0)) throw EvaluationError("rhs_decoupled: requires R0 > 0 and R0' > 0");
    const double h = R0 / R;
    const double xish = s.xi * R / R0;
    const double J1 = std::sqrt(1.0 + xish) / (2.0 * R0p) * detail::j1_integral(h, s.xi, quad);
    const double J2 = std::sqrt((1.0 + xish) / (1.0 + s.xi)) / R0p;

    DecoupledRhs d;
    d.dxi = detail::sqrt6 * sq1xi / (1.0 + s.z) + s.xi * (Rz / R) * detail::sqrt3 * sq1xi / D;
    d.dt = -Rz / D;
    d.dr = R * J1 * detail::sqrt6 * sq1xi / (1.0 + s.z) + detail::sqrt3 * Rz * (J2 + s.xi * J1) / D;
    return d;
}

// ---------------------------------------------------------------------------
// Integration: xi first, then (r, t) on the stored dense output
// ---------------------------------------------------------------------------

enum class DecoupledMode { two_stage, coupled };

struct DecoupledRun {
    DecoupledMode mode = DecoupledMode::two_stage;
    DecoupledState init{};
    double exclusion_band = 1e-6;
    Trajectory<1> xi_traj;  // two-stage
    Trajectory<2> rt_traj;  // two-stage
    Trajectory<3> coupled_traj;
    IvpStatus status = IvpStatus::reached_end;
    double z_end = 0.0;

    DecoupledState sample(double z) const {
        if (mode == DecoupledMode::coupled) {
            const auto y = coupled_traj.eval(z);
            return {z, y[0], y[1], y[2]};
        }
        const auto rt = rt_traj.eval(z);
        return {z, rt[0], rt[1], xi_traj.eval(z)[0]};
    }
};

namespace detail {
template <std::size_t N>
std::vector<EventSpec<N>> band_events(double eps, std::size_t xi_index) {
    std::vector<EventSpec<N>> ev;
    ev.push_back({[eps, xi_index](double, const std::array<double, N>& y) {
                      return (2.0 * y[xi_index] - 1.0) - eps;
                  },
                  EventDirection::falling, true, 1e-12});
    ev.push_back({[eps, xi_index](double, const std::array<double, N>& y) {
                      return (2.0 * y[xi_index] - 1.0) + eps;
                  },
                  EventDirection::rising, true, 1e-12});
    return ev;
}
} // namespace detail

inline DecoupledRun solve_decoupled(const DecoupledState& init, const LuminosityCurve& curve,
                                    const LtbModel& model, double z_end_req,
                                    const IvpSpec& spec = {},
                                    DecoupledMode mode = DecoupledMode::two_stage,
                                    double exclusion_band = 1e-6,
                                    const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    if (std::abs(2.0 * init.xi - 1.0) < exclusion_band)
        throw SingularEvaluation(SingularKind::geometric_denominator, init.z);
    DecoupledRun run;
    run.mode = mode;
    run.init = init;
    run.exclusion_band = exclusion_band;

    if (mode == DecoupledMode::coupled) {
        const auto rhs = [&](double z, const std::array<double, 3>& y) -> std::array<double, 3> {
            const DecoupledState s{z, y[0], y[1], y[2]};
            const DecoupledRhs d = rhs_decoupled(s, curve, model, exclusion_band, quad);
            return {d.dr, d.dt, d.dxi};
        };
        run.coupled_traj = solve_ivp<3>(rhs, {init.r, init.t, init.xi}, init.z, z_end_req, spec,
                                        detail::band_events<3>(exclusion_band, 2));
        run.status = run.coupled_traj.status;
        run.z_end = run.coupled_traj.z_end();
        return run;
    }

    // stage 1: scalar xi equation (independent of r and t)
    const auto rhs_xi = [&](double z, const std::array<double, 1>& y) -> std::array<double, 1> {
        if (std::abs(2.0 * y[0] - 1.0) < exclusion_band)
            throw SingularEvaluation(SingularKind::geometric_denominator, z);
        const double R = curve.R(z);
        const double Rz = curve.dRdz(z);
        const double sq = std::sqrt(1.0 + y[0]);
        return {detail::sqrt6 * sq / (1.0 + z) +
                y[0] * (Rz / R) * detail::sqrt3 * sq / delta_xi(y[0])};
    };
    run.xi_traj = solve_ivp<1>(rhs_xi, {init.xi}, init.z, z_end_req, spec,
                               detail::band_events<1>(exclusion_band, 0));
    const double z_stop = run.xi_traj.z_end();

    // stage 2: (r, t) using the stored xi(z)
    const auto rhs_rt = [&](double z, const std::array<double, 2>& y) -> std::array<double, 2> {
        const DecoupledState s{z, y[0], y[1], run.xi_traj.eval(z)[0]};
        const DecoupledRhs d = rhs_decoupled(s, curve, model, exclusion_band, quad);
        return {d.dr, d.dt};
    };
    run.rt_traj = solve_ivp<2>(rhs_rt, {init.r, init.t}, init.z, z_stop, spec);
    run.status = (run.xi_traj.status == IvpStatus::reached_end) ? run.rt_traj.status
                                                                : run.xi_traj.status;
    run.z_end = std::min(run.rt_traj.z_end(), z_stop);
    return run;
}

// ---------------------------------------------------------------------------
// (upprbnd) constant and interval classification
// ---------------------------------------------------------------------------

struct UpprbndResult {
    double C;        // inf over the interval of R/(z |R_z|)
    int rz_sign;     // +1 on I+, -1 on I-
    bool plus_interval() const { return rz_sign > 0; }
};

inline UpprbndResult check_upprbnd(const LuminosityCurve& curve, double z_lo, double z_hi,
                                   std::size_t n = 1001) {
    if (!(z_lo > 0) || !(z_hi > z_lo)) throw std::invalid_argument("check_upprbnd: need 0 < z_lo < z_hi");
    double C = std::numeric_limits<double>::infinity();
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double Rz = curve.dRdz(z);
        const int s = (Rz > 0) - (Rz < 0);
        if (sign == 0) sign = s;
        else if (s != 0 && s != sign) throw StraddlesCritical();
        C = std::min(C, curve.R(z) / (z * std::abs(Rz)));
    }
    return {C, sign};
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

namespace detail {
struct CertGrid {
    std::vector<double> z, R, Rz, M, xi, r, t;
};
inline CertGrid sample_run(const DecoupledRun& run, const LuminosityCurve& curve, std::size_t n) {
    CertGrid g;
    const double z0 = run.init.z, z1 = run.z_end;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = z0 + (z1 - z0) * static_cast<double>(i) / static_cast<double>(n - 1);
        const DecoupledState s = run.sample(z);
        g.z.push_back(z);
        g.R.push_back(curve.R(z));
        g.Rz.push_back(curve.dRdz(z));
        g.xi.push_back(s.xi);
        g.M.push_back(s.xi * g.R.back());
        g.r.push_back(s.r);
        g.t.push_back(s.t);
    }
    return g;
}
} // namespace detail

// K_xi = -sqrt3 sqrt(1+xi)/Delta_xi; decreasing in xi for xi > 1/2 with limit sqrt(3/2).
inline double K_xi(double xi) { return -detail::sqrt3 * std::sqrt(1.0 + xi) / delta_xi(xi); }

// M[z] <= c R[z] along the run, c = max{xi0, C/(2C+1)} (case 1: 0<xi0<1/2, R_z<0)
// or c = max{xi0, C/(2C-1)} (case 2: xi0>1/2, R_z>0). The (upprbnd) condition
// R > C z |R_z| is re-checked on the sampling grid.
inline BoundCertificate verify_thm1(const DecoupledRun& run, const LuminosityCurve& curve,
                                    std::optional<double> C_in = {}, std::size_t n_grid = 1001) {
    BoundCertificate cert;
    cert.z_lo = run.init.z;
    cert.z_hi = run.z_end;
    const auto g = detail::sample_run(run, curve, n_grid);

    int sign = 0;
    for (double rz : g.Rz) {
        const int s = (rz > 0) - (rz < 0);
        if (sign == 0) sign = s;
        else if (s != 0 && s != sign) {
            cert.applicable = false;
            cert.note = "R_z changes sign on the interval";
            return cert;
        }
    }
    const double xi0 = run.init.xi;
    const bool case1 = xi0 > 0 && xi0 < 0.5 && sign < 0;
    const bool case2 = xi0 > 0.5 && sign > 0;
    cert.claim_id = case1 ? ClaimId::thm1_case1 : ClaimId::thm1_case2;
    if (!case1 && !case2) {
        cert.applicable = false;
        cert.note = "hypotheses of neither case hold (xi0 position vs sign of R_z)";
        return cert;
    }

    const double C = C_in ? *C_in : check_upprbnd(curve, run.init.z, run.z_end, n_grid).C;
    double upprbnd_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.z.size(); ++i)
        upprbnd_margin = std::min(upprbnd_margin, g.R[i] - C * g.z[i] * std::abs(g.Rz[i]));
    cert.constants["C"] = C;
    cert.constants["upprbnd_margin"] = upprbnd_margin;
    if (upprbnd_margin < -1e-12) {
        cert.applicable = false;
        cert.note = "condition R > C z |R_z| fails on the interval";
        return cert;
    }

    const double xi_star = case1 ? C / (2.0 * C + 1.0) : C / (2.0 * C - 1.0);
    cert.constants["xi_star"] = xi_star;
    if (case2 && (C <= 0.5 || xi_star <= 0)) {
        // the case-2 constant formula degenerates for C <= 1/2; flagged instead of guessed
        cert.applicable = false;
        cert.note = "case-2 constant C/(2C-1) nonpositive for C <= 1/2";
        return cert;
    }
    const double c = std::max(xi0, xi_star);
    cert.constants[case1 ? "c1" : "c2"] = c;
    cert.constants["xi0"] = xi0;

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.z.size(); ++i)
        margin = std::min(margin, (c * g.R[i] - g.M[i]) / g.R[i]);
    cert.worst_margin = margin;
    cert.verdict = margin >= 0.0;
    return cert;
}

// c3 (R^{-(rho-1)} + R ln((1+z)/(1+z0))) <= M <= c4 ((1+ln(1+z))/R^{rho0-1/2})^2 with
// rho = sqrt(3/2), rho0 = K_{xi0}, c3 = min{xi0 R0^rho, sqrt6 sqrt(1+xi0)},
// c4 = 6 q0 R0^{2 rho0}. The upper-envelope exponent is the one the supersolution
// construction actually yields (rho0, not rho: R < 1 makes the rho form fail at z0).
inline BoundCertificate verify_thm2(const DecoupledRun& run, const LuminosityCurve& curve,
                                    std::size_t n_grid = 1001) {
    BoundCertificate cert;
    cert.claim_id = ClaimId::thm2;
    cert.z_lo = run.init.z;
    cert.z_hi = run.z_end;
    const auto g = detail::sample_run(run, curve, n_grid);

    const double xi0 = run.init.xi;
    bool rz_neg = true;
    for (double rz : g.Rz) rz_neg = rz_neg && (rz < 0);
    if (!(xi0 > 0.5) || !rz_neg) {
        cert.applicable = false;
        cert.note = "requires xi0 > 1/2 and R_z < 0 on the interval";
        return cert;
    }
    const double rho = std::sqrt(1.5);
    const double rho0 = K_xi(xi0);
    const double q0 = (xi0 + 1.0) / xi0;
    const double R0v = g.R.front();
    const double c3 = std::min(xi0 * std::pow(R0v, rho), detail::sqrt6 * std::sqrt(1.0 + xi0));
    const double c4 = 6.0 * q0 * std::pow(R0v, 2.0 * rho0);
    cert.constants = {{"rho", rho}, {"rho0", rho0}, {"q0", q0}, {"c3", c3}, {"c4", c4}, {"xi0", xi0}};

    const double z0 = g.z.front();
    double lo_margin = std::numeric_limits<double>::infinity();
    double up_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const double lower =
            c3 * (std::pow(g.R[i], -(rho - 1.0)) + g.R[i] * std::log((1.0 + g.z[i]) / (1.0 + z0)));
        const double upper =
            c4 * std::pow((1.0 + std::log(1.0 + g.z[i])) / std::pow(g.R[i], rho0 - 0.5), 2.0);
        lo_margin = std::min(lo_margin, (g.M[i] - lower) / g.M[i]);
        up_margin = std::min(up_margin, (upper - g.M[i]) / upper);
    }
    cert.constants["lower_margin"] = lo_margin;
    cert.constants["upper_margin"] = up_margin;
    cert.worst_margin = std::min(lo_margin, up_margin);
    cert.verdict = cert.worst_margin >= -1e-12;
    return cert;
}

// k1 z^{rho-1} <= M[z] <= k2 z^{2 rho - 1 + alpha} with k1, k2 from the thm2 constants
// and the numerically found envelope C1/z < R < C2/z; also fits the log-log slope of M.
inline BoundCertificate verify_growth_corollary(const DecoupledRun& run, const LuminosityCurve& curve,
                                                double alpha = 0.1, double fit_z_lo = 10.0,
                                                std::size_t n_grid = 1001) {
    BoundCertificate cert;
    cert.claim_id = ClaimId::growth_corollary;
    cert.z_lo = run.init.z;
    cert.z_hi = run.z_end;

    const CosmoParams p = curve.params();
    if (!(p.omega_lambda < 1.0)) {
        cert.applicable = false;
        cert.note = "requires omega_lambda < 1";
        return cert;
    }
    const double z_lambda = find_z_lambda(p).z_lambda;
    const auto g = detail::sample_run(run, curve, n_grid);
    if (!(g.M.front() > 2.0 * g.R.front()) || !(run.init.z > z_lambda)) {
        cert.applicable = false;
        cert.note = "requires M0 > 2 R[z0] and z0 > z_lambda";
        return cert;
    }
    BoundCertificate thm2 = verify_thm2(run, curve, n_grid);
    if (!thm2.applicable) {
        cert.applicable = false;
        cert.note = "theorem-2 hypotheses fail: " + thm2.note;
        return cert;
    }
    const double rho = thm2.constants["rho"], rho0 = thm2.constants["rho0"];
    const double c3 = thm2.constants["c3"], c4 = thm2.constants["c4"];

    double C1 = std::numeric_limits<double>::infinity(), C2 = 0.0;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        C1 = std::min(C1, g.z[i] * g.R[i]);
        C2 = std::max(C2, g.z[i] * g.R[i]);
    }
    const double k1 = c3 * std::pow(C2, 1.0 - rho);
    double env = 0.0;
    for (std::size_t i = 0; i < g.z.size(); ++i)
        env = std::max(env, std::pow(1.0 + std::log(1.0 + g.z[i]), 2.0) *
                                std::pow(g.z[i], (2.0 * rho0 - 1.0) - (2.0 * rho - 1.0 + alpha)));
    const double k2 = c4 * std::pow(C1, 1.0 - 2.0 * rho0) * env;

    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const double lo = k1 * std::pow(g.z[i], rho - 1.0);
        const double hi = k2 * std::pow(g.z[i], 2.0 * rho - 1.0 + alpha);
        margin = std::min(margin, std::min((g.M[i] - lo) / g.M[i], (hi - g.M[i]) / hi));
    }

    // log-log slope of M over [fit_z_lo, z_hi]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        if (g.z[i] < fit_z_lo) continue;
        const double x = std::log(g.z[i]), y = std::log(g.M[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    const double slope = (m >= 2) ? (sxy - sx * sy / m) / (sxx - sx * sx / m)
                                  : std::numeric_limits<double>::quiet_NaN();
    const double win_lo = rho - 1.0, win_hi = 2.0 * rho - 1.0 + alpha;

    cert.constants = {{"C1", C1}, {"C2", C2}, {"k1", k1},       {"k2", k2},
                      {"alpha", alpha}, {"slope", slope}, {"slope_lo", win_lo}, {"slope_hi", win_hi}};
    cert.worst_margin = margin;
    cert.verdict = margin >= -1e-12 && slope >= win_lo && slope <= win_hi;
    return cert;
}

// r strictly increasing, t strictly decreasing along the run.
inline BoundCertificate verify_monotonicity_corollary(const DecoupledRun& run,
                                                      const LuminosityCurve& curve,
                                                      std::size_t n_grid = 1001) {
    BoundCertificate cert;
    cert.claim_id = ClaimId::monotonicity_corollary;
    cert.z_lo = run.init.z;
    cert.z_hi = run.z_end;
    const auto g = detail::sample_run(run, curve, n_grid);
    double min_dr = std::numeric_limits<double>::infinity();
    double max_dt = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < g.z.size(); ++i) {
        min_dr = std::min(min_dr, g.r[i] - g.r[i - 1]);
        max_dt = std::max(max_dt, g.t[i] - g.t[i - 1]);
    }
    cert.constants = {{"min_r_step", min_dr}, {"max_t_step", max_dt}};
    cert.worst_margin = std::min(min_dr, -max_dt);
    cert.verdict = cert.worst_margin > 0.0;
    return cert;
}

// ---------------------------------------------------------------------------
// Proposition-6 box and the method of successive approximations
// ---------------------------------------------------------------------------

struct LipschitzBox {
    double xi_star, epsilon, rho_min, rho_max, lambda, h_star, r_frak;
    double M1 = 0, M2 = 0, M3 = 0, M = 0;

    void validate() const {
        if (!(xi_star > 0 && epsilon > 0 && rho_min > 0 && rho_max > 0 && lambda > 0 &&
              h_star > 0 && r_frak > 0))
            throw std::invalid_argument("LipschitzBox: all inputs must be positive");
    }
};

struct PicardBox {
    LipschitzBox bounds;
    double b;      // box radius, < 1/M
    double z_lo, z_hi; // interval with a guaranteed unique solution
};

inline PicardBox picard_box(const DecoupledState& init, LipschitzBox bounds, double z1,
                            double b = 0.0) {
    bounds.validate();
    if (!(init.xi < bounds.xi_star) || std::abs(2.0 * init.xi - 1.0) < bounds.epsilon)
        throw std::invalid_argument("picard_box: xi0 must satisfy xi0 < xi* and |2 xi0 - 1| >= eps");
    const double s3 = detail::sqrt3;
    bounds.M1 = bounds.lambda * (s3 + std::sqrt(2.0 + 2.0 * bounds.xi_star)) / bounds.epsilon;
    bounds.M2 = s3 * (bounds.rho_max * std::sqrt(bounds.h_star / 2.0) +
                      (1.0 + std::sqrt(bounds.h_star) / 2.0) * bounds.M1) / bounds.r_frak;
    bounds.M3 = std::sqrt(3.0 * (1.0 + bounds.xi_star)) *
                (std::sqrt(2.0) + bounds.M1 * bounds.xi_star / bounds.rho_min);
    bounds.M = std::max({bounds.M1, bounds.M2, bounds.M3});
    PicardBox box;
    box.bounds = bounds;
    box.b = (b > 0.0) ? b : 0.5 / bounds.M;
    if (!(box.b < 1.0 / bounds.M))
        throw std::invalid_argument("picard_box: need b < 1/M");
    box.z_lo = init.z;
    box.z_hi = init.z + std::min(z1 - init.z, box.b / bounds.M);
    return box;
}

struct PicardResult {
    std::vector<double> z;
    std::vector<std::array<double, 3>> y; // (r, t, xi)
    std::size_t iterations = 0;
    double last_delta = 0.0;
};

// Successive approximations X_{k+1}(z) = X_0 + int_{z0}^{z} f(s, X_k(s)) ds on a uniform
// grid (trapezoid cumulative), iterated to stagnation or max_iter.
inline PicardResult picard_solve(const DecoupledState& init, const LuminosityCurve& curve,
                                 const LtbModel& model, double z_hi, std::size_t n_grid = 201,
                                 std::size_t max_iter = 30, double tol = 1e-13,
                                 const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    PicardResult res;
    const double z0 = init.z;
    const double dz = (z_hi - z0) / static_cast<double>(n_grid - 1);
    res.z.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) res.z[i] = z0 + dz * static_cast<double>(i);
    res.y.assign(n_grid, {init.r, init.t, init.xi});

    std::vector<std::array<double, 3>> f(n_grid), next(n_grid);
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n_grid; ++i) {
            const DecoupledState s{res.z[i], res.y[i][0], res.y[i][1], res.y[i][2]};
            const DecoupledRhs d = rhs_decoupled(s, curve, model, 1e-9, quad);
            f[i] = {d.dr, d.dt, d.dxi};
        }
        next[0] = {init.r, init.t, init.xi};
        for (std::size_t i = 1; i < n_grid; ++i)
            for (int c = 0; c < 3; ++c)
                next[i][c] = next[i - 1][c] + 0.5 * dz * (f[i][c] + f[i - 1][c]);
        double delta = 0.0;
        for (std::size_t i = 0; i < n_grid; ++i)
            for (int c = 0; c < 3; ++c) delta = std::max(delta, std::abs(next[i][c] - res.y[i][c]));
        res.y = next;
        res.iterations = it + 1;
        res.last_delta = delta;
        if (delta < tol) break;
    }
    return res;
}

} // namespace ltb

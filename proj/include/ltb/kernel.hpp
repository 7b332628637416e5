#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltb/luminosity.hpp"
#include "ltb/numerics.hpp"

namespace ltb {

// ---------------------------------------------------------------------------
// Model and state
// ---------------------------------------------------------------------------

// Background functions of the dust model plus the sign trackers sigma = sgn dR/dt,
// delta = sgn dR/dr (run constants) and the reference time t0 at which R0(r) = R(t0,r).
struct LtbModel {
    std::function<double(double)> E;
    std::function<double(double)> Eprime;
    std::function<double(double)> R0;
    std::function<double(double)> R0prime;
    int sigma = +1;
    int delta = +1;
    double t0 = 0.0;
};

// E = r^2/2, M-target r^3/2, R0 = c r
inline LtbModel frw_model(double c, double t0) {
    return {[](double r) { return 0.5 * r * r; }, [](double r) { return r; },
            [c](double r) { return c * r; },      [c](double) { return c; },
            +1, +1, t0};
}

// constant E = 1 with linear R0 = c r (the decoupled section's setting)
inline LtbModel constant_e_model(double c = 1.0, double t0 = 0.0) {
    return {[](double) { return 1.0; }, [](double) { return 0.0; },
            [c](double r) { return c * r; }, [c](double) { return c; },
            +1, +1, t0};
}

// power-law E(r) = e0 r^p with linear R0 = c r
inline LtbModel power_law_model(double e0, double p, double c, double t0 = 0.0) {
    return {[e0, p](double r) { return e0 * std::pow(r, p); },
            [e0, p](double r) { return e0 * p * std::pow(r, p - 1.0); },
            [c](double r) { return c * r; },
            [c](double) { return c; },
            +1, +1, t0};
}

struct GeodesicState {
    double z;
    double r;
    double t;
    double M;
};

// ---------------------------------------------------------------------------
// Pointwise kernel quantities
// ---------------------------------------------------------------------------

// All derived quantities at one point. A carries the 1/(1+z) factor used as the
// source term of the ODE system; the ratio identity A_dt = B sqrt(1+2E) (no 1/(1+z))
// is available to callers via B and sqrt_1p2E.
struct KernelEval {
    double R = 0, R0 = 0;
    double h = 0;        // R0/R
    double xi = 0;       // M/R
    double xi_sharp = 0; // M/R0
    double JR = 0, JR0 = 0, JM = 0, JE = 0;
    double F = 0, G = 0;
    double A = 0; // B sqrt(1+2E)/(1+z)
    double B = 0; // sigma sqrt(2E + 2M/R)
    double detU = 0;
    double denom_geo = 0; // delta sigma sqrt(2E+2M/R) - sqrt(1+2E)
    double denom_sol = 0; // G E' R - F
    double E = 0, Eprime = 0, R0prime = 0;
    double sqrt_2E2MR = 0, sqrt_1p2E = 0;
};

// J(R, R0, M, E, t) = sqrt2 (t - t0) - sigma int_{R0}^{R} sqrt(tau/(tau E + M)) dtau
inline double eval_J(double R, const GeodesicState& s, const LtbModel& model,
                     const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    const double R0 = model.R0(s.r);
    const double E = model.E(s.r);
    if (!(R > 0) || !(R0 > 0)) throw EvaluationError("eval_J: R and R0 must be positive");
    const double lo = std::min(R0, R), hi = std::max(R0, R);
    if (lo * E + s.M <= 0.0 || hi * E + s.M <= 0.0)
        throw EvaluationError("eval_J: integrand singular (tau E + M <= 0)");
    const auto f = [&](double tau) { return std::sqrt(tau / (tau * E + s.M)); };
    return std::sqrt(2.0) * (s.t - model.t0) -
           model.sigma * integrate_adaptive(f, R0, R, quad);
}

inline KernelEval eval_kernel(const GeodesicState& s, double R, const LtbModel& model,
                              const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    KernelEval k;
    k.R = R;
    k.R0 = model.R0(s.r);
    k.E = model.E(s.r);
    k.Eprime = model.Eprime(s.r);
    k.R0prime = model.R0prime(s.r);
    if (!(R > 0) || !(k.R0 > 0) || !(k.E > 0))
        throw EvaluationError("eval_kernel: require R, R0, E > 0");

    k.xi = s.M / R;
    k.xi_sharp = s.M / k.R0;
    k.h = k.R0 / R;
    if (k.E + k.xi <= 0 || k.E + k.xi_sharp <= 0)
        throw EvaluationError("eval_kernel: E + xi and E + xi# must be positive");

    const double sig = model.sigma, dlt = model.delta;
    k.JR = -sig / std::sqrt(k.E + k.xi);
    k.JR0 = sig / std::sqrt(k.E + k.xi_sharp);
    const double E = k.E, xi = k.xi;
    // oriented integrals from 1 to h; for h < 1 (t > t0) the sign flips naturally
    k.JM = -0.5 * sig *
           integrate_adaptive([E, xi](double nu) { return std::sqrt(nu) * std::pow(E * nu + xi, -1.5); },
                              1.0, k.h, quad);
    k.JE = -0.5 * sig * R *
           integrate_adaptive([E, xi](double nu) { return nu * std::sqrt(nu) * std::pow(E * nu + xi, -1.5); },
                              1.0, k.h, quad);
    k.F = -(k.Eprime * k.JE + k.R0prime * k.JR0) / k.JR;
    k.G = -k.JM / k.JR;

    k.sqrt_2E2MR = std::sqrt(2.0 * k.E + 2.0 * s.M / R);
    k.sqrt_1p2E = std::sqrt(1.0 + 2.0 * k.E);
    k.B = sig * k.sqrt_2E2MR;
    k.A = k.B * k.sqrt_1p2E / (1.0 + s.z);
    k.denom_geo = dlt * sig * k.sqrt_2E2MR - k.sqrt_1p2E;
    k.denom_sol = k.G * k.Eprime * R - k.F;
    k.detU = k.B * (k.Eprime * k.G - k.F / R) * (k.sqrt_1p2E - sig * dlt * k.sqrt_2E2MR);
    return k;
}

// ---------------------------------------------------------------------------
// Right-hand side of the geodesic system
// ---------------------------------------------------------------------------

enum class SingularKind { horizon, tangency, critical_redshift, geometric_denominator };

inline const char* to_string(SingularKind k) {
    switch (k) {
        case SingularKind::horizon: return "horizon";
        case SingularKind::tangency: return "tangency";
        case SingularKind::critical_redshift: return "critical_redshift";
        case SingularKind::geometric_denominator: return "geometric_denominator";
    }
    return "?";
}

struct SingularEvaluation : EvaluationError {
    SingularKind kind;
    double z;
    SingularEvaluation(SingularKind k, double z_)
        : EvaluationError(std::string("singular denominator (") + to_string(k) + ")"), kind(k), z(z_) {}
};

struct RhsEval {
    double dr, dt, dM;
    KernelEval kernel;
};

// System (r,t,M)' driven by the data curve. dt/dz = delta R_z / denom_geo; dr and dM
// carry the source term A and the R_z-proportional part divided by both denominators.
inline RhsEval assemble_rhs(const GeodesicState& s, const LuminosityCurve& curve,
                            const LtbModel& model, const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    const double R = curve.R(s.z);
    const double Rz = curve.dRdz(s.z);
    KernelEval k = eval_kernel(s, R, model, quad);

    const double num_scale = std::abs(Rz) + std::abs(k.A) * R * (std::abs(k.F) + std::abs(k.G) + 1.0);
    if (std::abs(k.denom_geo) < 1e-12 * (1.0 + num_scale))
        throw SingularEvaluation(SingularKind::geometric_denominator, s.z);
    if (std::abs(k.denom_sol) < 1e-12 * (1.0 + num_scale))
        throw SingularEvaluation(SingularKind::tangency, s.z);

    const double dlt = model.delta;
    RhsEval out;
    out.kernel = k;
    out.dt = dlt * Rz / k.denom_geo;
    const double common = Rz * k.sqrt_1p2E / (R * k.denom_geo * k.denom_sol);
    out.dr = k.G * k.A * R / k.denom_sol - common * (s.M * k.G - R);
    out.dM = -k.F * k.A * R / k.denom_sol - common * (R * R * k.Eprime - k.F * s.M);
    return out;
}

// ---------------------------------------------------------------------------
// Solvability predicate (local criteria)
// ---------------------------------------------------------------------------

struct SolvabilityReport {
    bool solvable = false;
    bool condition1 = false; // sgn E' != sgn R0'
    bool condition2 = false;
    double lhs = 0.0; // |E' (R0-R)^2 / (2 M sqrt(27 E))|
    double rhs = 0.0; // |R0' sqrt(R0) / sqrt(E R0 + M)|
};

inline SolvabilityReport check_local_solvability(const GeodesicState& s, double R,
                                                 const LtbModel& model) {
    SolvabilityReport rep;
    const double E = model.E(s.r), Ep = model.Eprime(s.r);
    const double R0 = model.R0(s.r), R0p = model.R0prime(s.r);
    const auto sgn = [](double x) { return (x > 0) - (x < 0); };
    rep.condition1 = sgn(Ep) != sgn(R0p);
    rep.lhs = std::abs(Ep * (R0 - R) * (R0 - R) / (2.0 * s.M * std::sqrt(27.0 * E)));
    rep.rhs = std::abs(R0p * std::sqrt(R0) / std::sqrt(E * R0 + s.M));
    rep.condition2 = rep.lhs < rep.rhs;
    rep.solvable = rep.condition1 || rep.condition2;
    return rep;
}

// ---------------------------------------------------------------------------
// Geodesic tracing with event detection + singularity classification
// ---------------------------------------------------------------------------

struct SingularityReport {
    SingularKind kind;
    double z_location;
    std::map<std::string, double> diagnostics;
};

struct GeodesicTrace {
    Trajectory<3> trajectory; // y = (r, t, M)
    // raw located event records: ids 0 = 2M-R, 1 = denom_sol, 2 = R_z, 3 = denom_geo
    std::vector<SingularityReport> singularities;

    GeodesicState state_at(double z) const {
        const auto y = trajectory.eval(z);
        return {z, y[0], y[1], y[2]};
    }
};

// Classifies located sign changes: horizon iff 2M-R crosses zero with sigma = delta;
// tangency iff denom_sol crosses; critical_redshift iff R_z crosses. Coincident (within
// tol) R_z and 2M-R zeros are flagged possibly removable.
inline std::vector<SingularityReport> classify_singularity(const Trajectory<3>& traj,
                                                           const LtbModel& model,
                                                           const LuminosityCurve& curve,
                                                           double coincidence_tol = 1e-6) {
    std::vector<SingularityReport> out;
    std::vector<double> mass_shell_zeros, rz_zeros;
    for (const auto& ev : traj.events) {
        if (ev.event_index == 0) mass_shell_zeros.push_back(ev.z);
        if (ev.event_index == 2) rz_zeros.push_back(ev.z);
    }
    for (const auto& ev : traj.events) {
        const GeodesicState s{ev.z, ev.state[0], ev.state[1], ev.state[2]};
        const double R = curve.R(ev.z);
        switch (ev.event_index) {
            case 0: {
                if (model.sigma == model.delta) {
                    SingularityReport rep{SingularKind::horizon, ev.z, {}};
                    rep.diagnostics["two_M_minus_R"] = 2.0 * s.M - R;
                    rep.diagnostics["R"] = R;
                    out.push_back(rep);
                }
                break;
            }
            case 1: {
                SingularityReport rep{SingularKind::tangency, ev.z, {}};
                const KernelEval k = eval_kernel(s, R, model);
                rep.diagnostics["denom_sol"] = k.denom_sol;
                out.push_back(rep);
                break;
            }
            case 2: {
                SingularityReport rep{SingularKind::critical_redshift, ev.z, {}};
                rep.diagnostics["R_z"] = curve.dRdz(ev.z);
                double nearest = std::numeric_limits<double>::infinity();
                for (double zm : mass_shell_zeros) nearest = std::min(nearest, std::abs(zm - ev.z));
                rep.diagnostics["possibly_removable"] =
                    (nearest <= coincidence_tol) ? 1.0 : 0.0;
                if (std::isfinite(nearest)) rep.diagnostics["mass_shell_zero_distance"] = nearest;
                out.push_back(rep);
                break;
            }
            case 3: {
                // same zero set as 2M-R when sigma = delta; reported for sigma != delta only
                if (model.sigma != model.delta) {
                    SingularityReport rep{SingularKind::geometric_denominator, ev.z, {}};
                    out.push_back(rep);
                }
                break;
            }
            default: break;
        }
    }
    return out;
}

// Integrates the geodesic system from `init` to z_end with the singularity events armed.
inline GeodesicTrace trace_geodesic(const GeodesicState& init, const LuminosityCurve& curve,
                                    const LtbModel& model, double z_end, const IvpSpec& spec = {},
                                    const QuadratureSpec& quad = {1e-13, 1e-11, 60}) {
    using State = std::array<double, 3>;
    const auto rhs = [&](double z, const State& y) -> State {
        const GeodesicState s{z, y[0], y[1], y[2]};
        const RhsEval e = assemble_rhs(s, curve, model, quad);
        return {e.dr, e.dt, e.dM};
    };
    std::vector<EventSpec<3>> events;
    // 0: mass-shell relation 2M - R (terminal only when it makes detU vanish)
    events.push_back({[&](double z, const State& y) { return 2.0 * y[2] - curve.R(z); },
                      EventDirection::any, model.sigma == model.delta, 1e-10});
    // 1: tangency denominator G E' R - F
    events.push_back({[&](double z, const State& y) {
                          const GeodesicState s{z, y[0], y[1], y[2]};
                          return eval_kernel(s, curve.R(z), model, quad).denom_sol;
                      },
                      EventDirection::any, true, 1e-10});
    // 2: data derivative R_z (singularity candidate, not terminal by itself)
    events.push_back({[&](double z, const State&) { return curve.dRdz(z); },
                      EventDirection::any, false, 1e-10});
    // 3: geometric denominator
    events.push_back({[&](double z, const State& y) {
                          const GeodesicState s{z, y[0], y[1], y[2]};
                          return eval_kernel(s, curve.R(z), model, quad).denom_geo;
                      },
                      EventDirection::any, model.sigma != model.delta, 1e-10});

    GeodesicTrace trace;
    trace.trajectory = solve_ivp<3>(rhs, {init.r, init.t, init.M}, init.z, z_end, spec, events);
    trace.singularities = classify_singularity(trace.trajectory, model, curve);
    return trace;
}

} // namespace ltb

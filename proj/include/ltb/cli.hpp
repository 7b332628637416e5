#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltb/critical.hpp"
#include "ltb/decoupled.hpp"
#include "ltb/frw.hpp"
#include "ltb/kernel.hpp"
#include "ltb/luminosity.hpp"
#include "ltb/numerics.hpp"
#include "ltb/report.hpp"

namespace ltb {

// ---------------------------------------------------------------------------
// Scenario description (filled from flags or a key=value config file)
// ---------------------------------------------------------------------------

enum class Command { zlambda, trace, trace_decoupled, frw_check, crossing, bounds };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::zlambda: return "zlambda";
        case Command::trace: return "trace";
        case Command::trace_decoupled: return "trace-decoupled";
        case Command::frw_check: return "frw-check";
        case Command::crossing: return "crossing";
        case Command::bounds: return "bounds";
    }
    return "?";
}

struct Scenario {
    Command command = Command::zlambda;
    double omega_lambda = 0.0;
    double z0 = 1.0;
    double z1 = 2.0;

    // model selection: "frw" (E = r^2/2, R0 = c r) or "custom" (E = e0 r^p, R0 = c r)
    std::string model = "frw";
    double c = 1.0;
    double c_scale = 1.0; // crossing: c = c_scale * c_lambda
    double e0 = 0.5;
    double ep = 2.0;

    std::optional<double> xi0;
    std::optional<double> M0;
    double h0 = 1.0; // decoupled initial ratio R0(r0)/R[z0]
    double t0 = 1.0; // custom-model initial time

    double rtol = 1e-9;
    double atol = 1e-12;
    bool paper_convention = false;
    bool coupled = false;
    bool picard = false;
    double alpha = 0.1;
    std::optional<double> upprbnd_C;

    std::size_t samples = 512;
    std::string out_dir; // empty: no files written
    std::vector<std::string> plots; // column names plotted against z

    void validate() const {
        if (!(omega_lambda >= 0 && omega_lambda <= 1))
            throw std::invalid_argument("omega must lie in [0,1]");
        if (!(rtol > 0 && atol > 0)) throw std::invalid_argument("tolerances must be positive");
        if (command != Command::zlambda && !(z1 > z0))
            throw std::invalid_argument("range requires z1 > z0");
        if (command != Command::zlambda && !(z0 > 0))
            throw std::invalid_argument("z0 must be positive");
        if (model != "frw" && model != "custom")
            throw std::invalid_argument("model must be frw or custom");
        if (samples < 2) throw std::invalid_argument("samples must be at least 2");
    }

    IvpSpec ivp() const {
        IvpSpec s;
        s.rel_tol = rtol;
        s.abs_tol = atol;
        return s;
    }

    Convention convention() const {
        return paper_convention ? Convention::paper_sqrt2 : Convention::constraint_consistent;
    }

    nlohmann::json echo() const {
        nlohmann::json j{{"command", to_string(command)},
                         {"omega_lambda", omega_lambda},
                         {"z0", z0},
                         {"z1", z1},
                         {"model", model},
                         {"c", c},
                         {"c_scale", c_scale},
                         {"rtol", rtol},
                         {"atol", atol},
                         {"convention", paper_convention ? "paper" : "consistent"},
                         {"samples", samples}};
        if (xi0) j["xi0"] = *xi0;
        if (M0) j["M0"] = *M0;
        if (model == "custom") {
            j["e0"] = e0;
            j["ep"] = ep;
            j["t0"] = t0;
        }
        if (command == Command::trace_decoupled || command == Command::bounds) j["h0"] = h0;
        return j;
    }
};

struct RunReport {
    nlohmann::json report;          // full JSON report (scenario echo, results, events)
    Table trajectory;               // CSV body source
    std::map<std::string, double> summary; // flat values used by sweep aggregation
    int exit_code = 0;
    double timing_ms = 0.0;
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

namespace cli_detail {

inline nlohmann::json certificate_json(const BoundCertificate& cert) {
    nlohmann::json j{{"claim", to_string(cert.claim_id)},
                     {"applicable", cert.applicable},
                     {"verdict", cert.verdict},
                     {"worst_margin", cert.worst_margin},
                     {"z_lo", cert.z_lo},
                     {"z_hi", cert.z_hi}};
    for (const auto& [k, v] : cert.constants) j["constants"][k] = v;
    if (!cert.note.empty()) j["note"] = cert.note;
    return j;
}

inline nlohmann::json singularity_json(const SingularityReport& rep) {
    nlohmann::json j{{"kind", to_string(rep.kind)}, {"z", rep.z_location}};
    for (const auto& [k, v] : rep.diagnostics) j["diagnostics"][k] = v;
    return j;
}

inline LtbModel scenario_model(const Scenario& s, const FrwParams& frw) {
    if (s.model == "frw") return frw_model(s.c, reference_time(frw));
    return power_law_model(s.e0, s.ep, s.c, s.t0);
}

} // namespace cli_detail

// ---------------------------------------------------------------------------
// command implementations
// ---------------------------------------------------------------------------

inline RunReport run_zlambda(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    if (s.omega_lambda == 1.0) {
        out.report["no_critical_point"] = true;
        out.summary["no_critical_point"] = 1.0;
        return out;
    }
    const CosmoParams p{s.omega_lambda};
    const CriticalPoint cp = find_z_lambda(p, 1e-12);
    const auto consts = zlambda_bound_constants();
    const BoundCertificate cert = verify_zlambda_bounds(p, cp, consts);
    out.report["z_lambda"] = cp.z_lambda;
    out.report["residual"] = cp.residual;
    out.report["bounds"] = cli_detail::certificate_json(cert);
    out.summary = {{"z_lambda", cp.z_lambda},
                   {"residual", cp.residual},
                   {"bounds_hold", cert.verdict ? 1.0 : 0.0}};
    out.trajectory.columns = {"omega_lambda", "z_lambda", "residual"};
    out.trajectory.rows = {{s.omega_lambda, cp.z_lambda, cp.residual}};
    return out;
}

inline RunReport run_trace(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    const CosmoParams cosmo{s.omega_lambda};
    LuminosityCurve curve(cosmo);
    const FrwParams frw(s.c, s.z0, s.convention());
    const LtbModel model = cli_detail::scenario_model(s, frw);

    GeodesicState init{};
    init.z = s.z0;
    if (s.model == "frw") {
        const FrwState f = closed_solution(s.z0, frw, curve);
        init.r = f.r;
        init.t = f.t;
        init.M = s.M0 ? *s.M0 : (s.xi0 ? *s.xi0 * curve.R(s.z0) : f.M);
    } else {
        init.r = curve.R(s.z0) / s.c; // R0(r0) = R[z0] for the linear R0 family
        init.t = s.t0;
        init.M = s.M0 ? *s.M0 : (s.xi0.value_or(0.25)) * curve.R(s.z0);
    }

    const GeodesicTrace trace = trace_geodesic(init, curve, model, s.z1, s.ivp());
    const double z_end = trace.trajectory.z_end();

    out.trajectory.columns = {"z", "r", "t", "M", "xi", "R", "R_z", "detU", "denom_sol", "denom_geo"};
    for (std::size_t i = 0; i < s.samples; ++i) {
        const double z = s.z0 + (z_end - s.z0) * static_cast<double>(i) / static_cast<double>(s.samples - 1);
        const auto y = trace.trajectory.eval(z);
        const GeodesicState st{z, y[0], y[1], y[2]};
        double detU = std::numeric_limits<double>::quiet_NaN();
        double dsol = detU, dgeo = detU;
        try {
            const KernelEval k = eval_kernel(st, curve.R(z), model);
            detU = k.detU;
            dsol = k.denom_sol;
            dgeo = k.denom_geo;
        } catch (const EvaluationError&) {
        }
        out.trajectory.rows.push_back({z, y[0], y[1], y[2], y[2] / curve.R(z), curve.R(z),
                                       curve.dRdz(z), detU, dsol, dgeo});
    }

    out.report["z_end"] = z_end;
    out.report["status"] = (trace.trajectory.status == IvpStatus::reached_end)     ? "reached_end"
                           : (trace.trajectory.status == IvpStatus::terminal_event) ? "terminal_event"
                                                                                    : "step_underflow";
    for (const auto& rep : trace.singularities)
        out.report["events"].push_back(cli_detail::singularity_json(rep));
    out.summary = {{"z_end", z_end},
                   {"terminated", trace.trajectory.status != IvpStatus::reached_end ? 1.0 : 0.0}};
    out.exit_code = (trace.trajectory.status == IvpStatus::reached_end) ? 0 : 2;
    return out;
}

inline RunReport run_trace_decoupled(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    const CosmoParams cosmo{s.omega_lambda};
    LuminosityCurve curve(cosmo);
    const LtbModel model = constant_e_model(s.c);

    DecoupledState init{};
    init.z = s.z0;
    init.r = s.h0 * curve.R(s.z0) / s.c;
    init.t = s.t0;
    init.xi = s.xi0 ? *s.xi0 : (s.M0 ? *s.M0 / curve.R(s.z0) : 0.25);

    const DecoupledRun run = solve_decoupled(init, curve, model, s.z1, s.ivp(),
                                             s.coupled ? DecoupledMode::coupled
                                                       : DecoupledMode::two_stage);
    out.trajectory.columns = {"z", "r", "t", "M", "xi", "R", "R_z"};
    for (std::size_t i = 0; i < s.samples; ++i) {
        const double z = s.z0 + (run.z_end - s.z0) * static_cast<double>(i) / static_cast<double>(s.samples - 1);
        const DecoupledState st = run.sample(z);
        out.trajectory.rows.push_back(
            {z, st.r, st.t, st.xi * curve.R(z), st.xi, curve.R(z), curve.dRdz(z)});
    }
    out.report["z_end"] = run.z_end;
    out.report["status"] = (run.status == IvpStatus::reached_end) ? "reached_end" : "terminal_event";
    out.summary = {{"z_end", run.z_end},
                   {"xi_end", run.sample(run.z_end).xi},
                   {"terminated", run.status != IvpStatus::reached_end ? 1.0 : 0.0}};
    out.exit_code = (run.status == IvpStatus::reached_end) ? 0 : 2;
    return out;
}

inline RunReport run_frw_check(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    const CosmoParams cosmo{s.omega_lambda};
    LuminosityCurve curve(cosmo);
    const FrwParams p(s.c, s.z0, s.convention());
    const OracleReport rep = oracle_compare(p, curve, s.z1, s.ivp(), s.samples);

    out.report["max_rel_deviation"] = rep.max_rel_dev;
    out.report["max_rel_dev_r"] = rep.max_rel_dev_r;
    out.report["max_rel_dev_t"] = rep.max_rel_dev_t;
    out.report["max_rel_dev_M"] = rep.max_rel_dev_M;
    out.report["z_end"] = rep.z_end;

    const LtbModel model = frw_model(p.c, reference_time(p));
    const FrwState init = closed_solution(s.z0, p, curve);
    const GeodesicTrace trace =
        trace_geodesic({s.z0, init.r, init.t, init.M}, curve, model, s.z1, s.ivp());
    out.trajectory.columns = {"z", "r", "t", "M", "r_closed", "t_closed", "M_closed"};
    for (std::size_t i = 0; i < s.samples; ++i) {
        const double z = s.z0 + (rep.z_end - s.z0) * static_cast<double>(i) / static_cast<double>(s.samples - 1);
        const auto y = trace.trajectory.eval(z);
        const FrwState f = closed_solution(z, p, curve);
        out.trajectory.rows.push_back({z, y[0], y[1], y[2], f.r, f.t, f.M});
    }
    out.summary = {{"max_rel_deviation", rep.max_rel_dev}};
    out.exit_code = (rep.status == IvpStatus::reached_end) ? 0 : 2;
    return out;
}

inline RunReport run_crossing(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    const CosmoParams cosmo{s.omega_lambda};
    LuminosityCurve curve(cosmo);
    const double cl = c_lambda(cosmo, s.z0);
    const FrwParams p(s.c_scale * cl, s.z0, s.convention());

    const CrossingResult res = cross_singularity(p, curve, s.z0, s.z1, s.ivp());
    out.report["c_lambda"] = cl;
    out.report["c"] = p.c;
    out.report["z_lambda"] = res.z_lambda;
    out.report["crossed"] = res.crossed;
    out.report["regularized"] = res.regularized;
    out.report["z_stop"] = res.z_stop;
    if (res.blowup_exponent) {
        out.report["blowup_exponent"] = *res.blowup_exponent;
        nlohmann::json ev{{"kind", "critical_redshift"},
                          {"z", res.z_stop},
                          {"diagnostics", {{"adot_blowup_exponent", *res.blowup_exponent}}}};
        out.report["events"].push_back(ev);
    }

    out.trajectory.columns = {"z", "t", "r", "M", "R", "R_z"};
    for (std::size_t i = 0; i < s.samples; ++i) {
        const double z = s.z0 + (res.z_stop - s.z0) * static_cast<double>(i) / static_cast<double>(s.samples - 1);
        const FrwState f = closed_solution(z, p, curve);
        out.trajectory.rows.push_back({z, res.t_at(z), f.r, f.M, curve.R(z), curve.dRdz(z)});
    }
    out.summary = {{"crossed", res.crossed ? 1.0 : 0.0},
                   {"z_stop", res.z_stop},
                   {"blowup_exponent", res.blowup_exponent.value_or(0.0)}};
    out.exit_code = res.crossed ? 0 : 2;
    return out;
}

inline RunReport run_bounds(const Scenario& s) {
    RunReport out;
    out.report["scenario"] = s.echo();
    const CosmoParams cosmo{s.omega_lambda};
    LuminosityCurve curve(cosmo);
    const LtbModel model = constant_e_model(s.c);

    DecoupledState init{};
    init.z = s.z0;
    init.r = s.h0 * curve.R(s.z0) / s.c;
    init.t = s.t0;
    init.xi = s.xi0.value_or(1.0);

    const DecoupledRun run = solve_decoupled(init, curve, model, s.z1, s.ivp());
    out.report["z_end"] = run.z_end;

    try {
        const UpprbndResult ub = check_upprbnd(curve, s.z0, run.z_end);
        out.report["upprbnd"] = {{"C", ub.C}, {"interval", ub.plus_interval() ? "I+" : "I-"}};
    } catch (const StraddlesCritical&) {
        out.report["upprbnd"] = {{"error", "straddles z_lambda"}};
    }

    std::vector<BoundCertificate> certs;
    certs.push_back(verify_thm1(run, curve, s.upprbnd_C));
    certs.push_back(verify_thm2(run, curve));
    certs.push_back(verify_growth_corollary(run, curve, s.alpha));
    certs.push_back(verify_monotonicity_corollary(run, curve));
    bool all_ok = true;
    for (const auto& cert : certs) {
        out.report["certificates"].push_back(cli_detail::certificate_json(cert));
        if (cert.applicable && !cert.verdict) all_ok = false;
        out.summary[std::string(to_string(cert.claim_id)) + "_holds"] =
            cert.applicable ? (cert.verdict ? 1.0 : 0.0) : -1.0;
    }

    if (s.picard) {
        const double span = std::min(0.4, s.z1 - s.z0);
        double xi_max = 0, R_min = 1e300, R_max = 0, Rz_max = 0, h_max = 0;
        for (int i = 0; i <= 100; ++i) {
            const double z = s.z0 + span * i / 100.0;
            const DecoupledState st = run.sample(std::min(z, run.z_end));
            xi_max = std::max(xi_max, st.xi);
            R_min = std::min(R_min, curve.R(z));
            R_max = std::max(R_max, curve.R(z));
            Rz_max = std::max(Rz_max, std::abs(curve.dRdz(z)));
            h_max = std::max(h_max, std::max(st.r, init.r) * s.c / curve.R(z));
        }
        LipschitzBox box{1.1 * xi_max, std::min(std::abs(2.0 * init.xi - 1.0), 1.0), 0.9 * R_min,
                         1.1 * R_max, 1.1 * Rz_max, 1.1 * std::max(h_max, 1.0), s.c};
        const PicardBox pb = picard_box(init, box, s.z0 + span);
        const PicardResult pr = picard_solve(init, curve, model, pb.z_hi);
        double worst = 0.0;
        for (std::size_t i = 0; i < pr.z.size(); ++i) {
            const DecoupledState st = run.sample(pr.z[i]);
            worst = std::max({worst, std::abs(pr.y[i][0] - st.r), std::abs(pr.y[i][1] - st.t),
                              std::abs(pr.y[i][2] - st.xi)});
        }
        out.report["picard"] = {{"M", pb.bounds.M},        {"b", pb.b},
                                {"z_hi", pb.z_hi},          {"iterations", pr.iterations},
                                {"last_delta", pr.last_delta}, {"max_dev_vs_rk", worst}};
        out.summary["picard_max_dev"] = worst;
        certs.push_back(BoundCertificate{ClaimId::prop6_box,
                                         {{"M", pb.bounds.M}, {"b", pb.b}, {"max_dev", worst}},
                                         pb.z_lo,
                                         pb.z_hi,
                                         worst <= 1e-6,
                                         1e-6 - worst,
                                         true,
                                         ""});
        out.report["certificates"].push_back(cli_detail::certificate_json(certs.back()));
    }

    out.trajectory.columns = {"z", "r", "t", "M", "xi", "R", "R_z"};
    for (std::size_t i = 0; i < s.samples; ++i) {
        const double z = s.z0 + (run.z_end - s.z0) * static_cast<double>(i) / static_cast<double>(s.samples - 1);
        const DecoupledState st = run.sample(z);
        out.trajectory.rows.push_back(
            {z, st.r, st.t, st.xi * curve.R(z), st.xi, curve.R(z), curve.dRdz(z)});
    }
    out.summary["all_certificates_hold"] = all_ok ? 1.0 : 0.0;
    out.exit_code = (run.status == IvpStatus::reached_end) ? 0 : 2;
    return out;
}

// ---------------------------------------------------------------------------
// dispatch, file emission, sweep
// ---------------------------------------------------------------------------

inline RunReport run_scenario(const Scenario& s) {
    s.validate();
    const auto start = std::chrono::steady_clock::now();
    RunReport out;
    switch (s.command) {
        case Command::zlambda: out = run_zlambda(s); break;
        case Command::trace: out = run_trace(s); break;
        case Command::trace_decoupled: out = run_trace_decoupled(s); break;
        case Command::frw_check: out = run_frw_check(s); break;
        case Command::crossing: out = run_crossing(s); break;
        case Command::bounds: out = run_bounds(s); break;
    }
    out.timing_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
    out.report["timing_ms"] = out.timing_ms;
    out.report["exit_code"] = out.exit_code;

    if (!s.out_dir.empty()) {
        const std::filesystem::path dir(s.out_dir);
        write_file(dir / "trajectory.csv", out.trajectory.to_csv());
        write_file(dir / "report.json", out.report.dump(2) + "\n");
        for (const auto& col : s.plots)
            write_file(dir / (col + ".dat"), out.trajectory.to_plot_dat("z", col));
    }
    return out;
}

struct SweepRow {
    double value;
    bool ok;
    std::string error;
    std::map<std::string, double> summary;
};

struct SweepReport {
    std::string parameter;
    std::vector<SweepRow> rows;
    Table aggregate;
    int exit_code = 0;
};

// Runs the scenario once per parameter value (concurrently), aggregating one CSV row per
// value in ascending order. Failed runs are recorded per-row and the sweep continues.
inline SweepReport sweep(const Scenario& base, const std::string& parameter,
                         std::vector<double> values) {
    if (parameter != "omega_lambda" && parameter != "c" && parameter != "xi0" && parameter != "z0")
        throw std::invalid_argument("sweep parameter must be one of omega_lambda, c, xi0, z0");
    std::sort(values.begin(), values.end());

    SweepReport rep;
    rep.parameter = parameter;

    auto make_scenario = [&](double v) {
        Scenario s = base;
        s.out_dir.clear();
        if (parameter == "omega_lambda") s.omega_lambda = v;
        else if (parameter == "c") {
            if (base.command == Command::crossing) s.c_scale = v;
            else s.c = v;
        } else if (parameter == "xi0") s.xi0 = v;
        else s.z0 = v;
        return s;
    };

    std::vector<std::future<SweepRow>> futures;
    for (double v : values)
        futures.push_back(std::async(std::launch::async, [&, v] {
            SweepRow row{v, true, "", {}};
            try {
                const RunReport r = run_scenario(make_scenario(v));
                row.summary = r.summary;
                row.ok = r.exit_code == 0;
                if (!row.ok) row.error = "exit code " + std::to_string(r.exit_code);
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
            return row;
        }));
    for (auto& f : futures) rep.rows.push_back(f.get());

    // aggregate columns: the union of summary keys, in first-seen order
    std::vector<std::string> keys;
    for (const auto& row : rep.rows)
        for (const auto& [k, _] : row.summary)
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    rep.aggregate.columns = {parameter, "ok"};
    rep.aggregate.columns.insert(rep.aggregate.columns.end(), keys.begin(), keys.end());
    for (const auto& row : rep.rows) {
        std::vector<double> vals{row.value, row.ok ? 1.0 : 0.0};
        for (const auto& k : keys) {
            const auto it = row.summary.find(k);
            vals.push_back(it == row.summary.end() ? std::numeric_limits<double>::quiet_NaN()
                                                   : it->second);
        }
        rep.aggregate.rows.push_back(vals);
    }
    return rep;
}

} // namespace ltb

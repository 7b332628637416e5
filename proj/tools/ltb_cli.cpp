// Scenario-driven front end: configure a cosmology, model, and run; emit CSV
// trajectories, JSON certificate reports, and plot-ready data files.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltb/cli.hpp"

namespace {

void add_common(CLI::App* cmd, ltb::Scenario& s, std::string& range,
                std::string& sweep_param, std::vector<double>& sweep_values) {
    cmd->add_option("--omega", s.omega_lambda, "cosmological-constant fraction in [0,1]");
    cmd->add_option("--z0", s.z0, "initial redshift");
    cmd->add_option("--z1", s.z1, "final redshift");
    cmd->add_option("--range", range, "redshift range a:b (overrides --z0/--z1)");
    cmd->add_option("--rtol", s.rtol, "integrator relative tolerance");
    cmd->add_option("--atol", s.atol, "integrator absolute tolerance");
    cmd->add_option("--samples", s.samples, "rows in the emitted trajectory CSV");
    cmd->add_option("--out", s.out_dir, "output directory (trajectory.csv, report.json, *.dat)");
    cmd->add_option("--plot", s.plots, "column names to emit as two-column .dat files");
    cmd->add_flag_callback(
        "--convention-paper", [&s] { s.paper_convention = true; },
        "use the printed sqrt2 time parametrization instead of the constraint-consistent one");
    auto* conv = cmd->add_option_function<std::string>(
        "--convention",
        [&s](const std::string& v) {
            if (v == "paper") s.paper_convention = true;
            else if (v == "consistent") s.paper_convention = false;
            else throw CLI::ValidationError("--convention must be paper or consistent");
        },
        "time parametrization: paper | consistent");
    conv->expected(1);
    cmd->add_option("--sweep", sweep_param, "sweep parameter: omega_lambda | c | xi0 | z0");
    cmd->add_option("--values", sweep_values, "sweep values")->delimiter(',');
    cmd->set_config("--config", "", "key=value scenario file (flags override it)");
}

void apply_range(ltb::Scenario& s, const std::string& range) {
    if (range.empty()) return;
    const auto colon = range.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--range expects a:b");
    s.z0 = std::stod(range.substr(0, colon));
    s.z1 = std::stod(range.substr(colon + 1));
}

int finish(const ltb::Scenario& s, const std::string& range, const std::string& sweep_param,
           const std::vector<double>& sweep_values) {
    ltb::Scenario sc = s;
    apply_range(sc, range);
    if (!sweep_param.empty()) {
        const ltb::SweepReport rep = ltb::sweep(sc, sweep_param, sweep_values);
        const std::string csv = rep.aggregate.to_csv();
        if (!sc.out_dir.empty())
            ltb::write_file(std::filesystem::path(sc.out_dir) / "sweep.csv", csv);
        std::cout << csv;
        for (const auto& row : rep.rows)
            if (!row.ok)
                std::cerr << "value " << ltb::fmt_g17(row.value) << ": " << row.error << "\n";
        return 0;
    }
    const ltb::RunReport rep = ltb::run_scenario(sc);
    std::cout << rep.report.dump(2) << "\n";
    return rep.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"redshift-data map for spherically symmetric dust models: trace the "
                 "geodesic system driven by luminosity-distance data, locate and classify "
                 "its singularities, and certify growth bounds"};
    app.require_subcommand(1);

    ltb::Scenario s;
    std::string range, sweep_param;
    std::vector<double> sweep_values;

    auto* zl = app.add_subcommand("zlambda", "locate the critical redshift and check its bounds");
    auto* tr = app.add_subcommand("trace", "integrate the general geodesic system");
    auto* td = app.add_subcommand("trace-decoupled", "integrate the constant-E decoupled system");
    auto* fc = app.add_subcommand("frw-check", "compare the general system against the closed-form run");
    auto* cr = app.add_subcommand("crossing", "integrate the time equation across the critical redshift");
    auto* bd = app.add_subcommand("bounds", "run the decoupled system and emit bound certificates");

    for (CLI::App* cmd : {zl, tr, td, fc, cr, bd})
        add_common(cmd, s, range, sweep_param, sweep_values);

    double xi0 = -1.0, M0 = -1.0;
    for (CLI::App* cmd : {tr, td, bd}) {
        cmd->add_option("--xi0", xi0, "initial xi = M/R");
        cmd->add_option("--M0", M0, "initial mass value");
    }
    for (CLI::App* cmd : {tr, fc, td, bd}) cmd->add_option("--c", s.c, "slope of R0 = c r");
    tr->add_option("--model", s.model, "frw | custom");
    tr->add_option("--e0", s.e0, "custom model: E(r) = e0 r^p coefficient");
    tr->add_option("--ep", s.ep, "custom model: E(r) = e0 r^p exponent");
    tr->add_option("--t0", s.t0, "custom model: initial time");
    cr->add_option("--c-scale", s.c_scale, "c = c_scale * c_lambda");
    for (CLI::App* cmd : {td, bd}) {
        cmd->add_option("--h0", s.h0, "initial ratio R0(r0)/R[z0]");
        cmd->add_flag("--coupled", s.coupled, "integrate the 3-system jointly instead of xi-first");
    }
    bd->add_flag("--picard", s.picard, "also run the successive-approximation check");
    bd->add_option("--alpha", s.alpha, "growth-corollary exponent slack");
    double upC = -1.0;
    bd->add_option("--C", upC, "use this constant in the theorem-1 certificate");

    CLI11_PARSE(app, argc, argv);

    if (zl->parsed()) s.command = ltb::Command::zlambda;
    if (tr->parsed()) s.command = ltb::Command::trace;
    if (td->parsed()) s.command = ltb::Command::trace_decoupled;
    if (fc->parsed()) s.command = ltb::Command::frw_check;
    if (cr->parsed()) s.command = ltb::Command::crossing;
    if (bd->parsed()) s.command = ltb::Command::bounds;
    if (xi0 >= 0) s.xi0 = xi0;
    if (M0 >= 0) s.M0 = M0;
    if (upC > 0) s.upprbnd_C = upC;

    try {
        return finish(s, range, sweep_param, sweep_values);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

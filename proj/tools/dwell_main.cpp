#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dwell/darkstates.hpp"
#include "dwell/errors.hpp"
#include "dwell/experiment.hpp"
#include "dwell/models.hpp"
#include "dwell/version.hpp"

namespace {

// "N=5000,10000" -> {"N", {5000, 10000}}
std::pair<std::string, std::vector<double>> parse_axis_spec(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw dwell::ConfigError("--axis expects param=v1,v2,... (got '" + spec + "')");
    std::vector<double> values;
    std::istringstream in(spec.substr(eq + 1));
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw dwell::ConfigError("--axis value '" + item + "' is not a number");
        }
    }
    if (values.empty()) throw dwell::ConfigError("--axis needs at least one value");
    return {spec.substr(0, eq), values};
}

void apply_tol(dwell::ExperimentConfig& cfg, double tol) {
    if (tol == 0.0) return;  // keep the config's tolerances
    if (!(tol > 0.0) || tol >= 1.0) throw dwell::ConfigError("--tol must lie in (0, 1)");
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
}

void report(const std::vector<std::filesystem::path>& files) {
    for (const auto& p : files) std::cout << "wrote " << p.string() << "\n";
}

// Stationarity table for the dark-state family: both residuals must vanish
// to rounding for every n, otherwise something is off in the model algebra.
int run_dark_verify(int n_max) {
    using namespace dwell;
    if (n_max < 0) throw ConfigError("--n-max must be >= 0");
    ModelParams mp;
    mp.N = 5000;
    mp.kappa = 100.0;
    mp.photon_dim = 2;
    mp.atomic_dim = n_max + 2;
    const ModeLayout layout = weak_layout(mp);
    const SparseOperator h = build_weak_tunneling(mp, layout);
    const std::vector<CollapseChannel> collapse = {{annihilation(layout, "a"), mp.kappa}};

    std::printf("%3s  %22s  %22s\n", "n", "hamiltonian_residual", "lindblad_residual");
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const StateVector dn = dark_state_weak(layout, n);
        const double hr = hamiltonian_residual(h, dn);
        const double lr = lindblad_residual(h, collapse, dn);
        worst = std::max({worst, hr, lr});
        std::printf("%3d  %22.3e  %22.3e\n", n, hr, lr);
    }
    if (worst > 1e-12) {
        std::printf("FAIL: max residual %.3e exceeds 1e-12\n", worst);
        return 3;
    }
    std::printf("OK: all residuals at or below 1e-12 (max %.3e)\n", worst);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwell: dissipative cavity + double-well condensate dynamics"};
    app.set_version_flag("--version", std::string("dwell ") + dwell::kVersion);
    app.require_subcommand(1);

    std::string out_dir = "out";
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    double tol = 0.0;
    app.add_option("--out-dir", out_dir, "directory for CSV and manifest output")
        ->capture_default_str();
    app.add_option("--workers", workers, "concurrent sweep points")->capture_default_str();
    app.add_option("--tol", tol, "override integrator rel_tol (abs_tol = tol / 100)");

    auto* simulate = app.add_subcommand("simulate", "run a figure preset");
    std::string preset;
    simulate->add_option("preset", preset, "one of fig2|fig3|fig4|fig5|figA")->required();

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    std::string run_config;
    run->add_option("--config", run_config, "INI experiment description")->required();

    auto* sweep = app.add_subcommand("sweep", "rerun a config across an axis of values");
    std::string sweep_config, axis_spec;
    sweep->add_option("--config", sweep_config, "INI experiment description")->required();
    sweep->add_option("--axis", axis_spec, "param=v1,v2,...")->required();

    auto* dark = app.add_subcommand("dark-verify", "print dark-state stationarity residuals");
    int n_max = 5;
    dark->add_option("--n-max", n_max, "largest dark quantum number")->capture_default_str();

    // let the global flags (--out-dir, --workers, --tol) appear after the subcommand too
    for (CLI::App* sub : {simulate, run, sweep, dark}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit clean, usage errors exit 2
    }

    try {
        if (simulate->parsed()) {
            for (dwell::ExperimentConfig cfg : dwell::preset_configs(preset)) {
                apply_tol(cfg, tol);
                report(dwell::write_outputs(dwell::run_experiment(cfg), out_dir));
            }
        } else if (run->parsed()) {
            dwell::ExperimentConfig cfg =
                dwell::parse_experiment_config(dwell::Config::parse_file(run_config));
            apply_tol(cfg, tol);
            report(dwell::write_outputs(dwell::run_experiment(cfg), out_dir));
        } else if (sweep->parsed()) {
            const auto [param, values] = parse_axis_spec(axis_spec);
            dwell::ExperimentConfig base =
                dwell::parse_experiment_config(dwell::Config::parse_file(sweep_config));
            apply_tol(base, tol);
            report(dwell::run_sweep(base, param, values, workers, out_dir).files);
        } else {
            return run_dark_verify(n_max);
        }
        return 0;
    } catch (const dwell::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dwell::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dwell::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const dwell::Error& e) {  // integration / convergence / numeric / resource
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

#pragma once

// Experiment layer: a flat config describes one run (regime, model numbers,
// initial state, output grid); running it produces named time series which
// are emitted as one CSV per curve plus a manifest that reruns identically.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dwell/config.hpp"
#include "dwell/darkstates.hpp"
#include "dwell/entanglement.hpp"
#include "dwell/errors.hpp"
#include "dwell/fock.hpp"
#include "dwell/lindblad.hpp"
#include "dwell/models.hpp"
#include "dwell/squeezing.hpp"
#include "dwell/version.hpp"

namespace dwell {

inline constexpr int kSectorAuto = -2;  // cap at the initial total excitation
inline constexpr int kSectorOff = -1;   // evolve in the full product space

struct ExperimentConfig {
    // [experiment]
    std::string regime = "weak";  // strong | weak | squeezing
    std::string label = "run";
    std::string mode = "trajectory";  // trajectory | steady
    double t_final = 0.0;             // 0 = regime default (1 for gt, 10 for Jg_t)
    int n_samples = 400;
    std::vector<std::string> observables;  // empty = regime default

    // [model] (strong | weak)
    long long N = 5000;
    double kappa = 100.0;
    double detuning = 0.0;
    double chi = 0.0;
    int photon_dim = 0;  // 0 = auto: initial excitation + 2
    int atomic_dim = 0;  // 0 = auto
    int sector_max = kSectorAuto;

    // [initial] (strong | weak); dark_n >= 0 selects a dark state instead
    std::vector<int> occupations;
    int dark_n = -1;

    // [integrator]
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;

    // [squeezing]
    double J_g = 1.0;
    double U_ggN = 1.0;

    // [manifest] (informational)
    std::string preset;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
}

template <typename T, typename Fmt>
std::string join_list(const std::vector<T>& items, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += fmt(items[i]);
    }
    return out;
}

inline const std::map<std::string, std::vector<std::string>>& experiment_schema() {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"experiment", {"label", "mode", "n_samples", "observables", "regime", "t_final"}},
        {"initial", {"dark_n", "occupations"}},
        {"integrator", {"abs_tol", "rel_tol"}},
        {"manifest", {"preset", "tool", "version"}},
        {"model", {"N", "atomic_dim", "chi", "detuning", "kappa", "photon_dim", "sector_max"}},
        {"squeezing", {"J_g", "U_ggN"}},
    };
    return schema;
}

inline void check_label(const std::string& label) {
    if (label.empty()) throw ConfigError("experiment.label must not be empty");
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (!ok)
            throw ConfigError("experiment.label '" + label +
                              "' may only contain letters, digits, '_', '.', '-'");
    }
}

inline void check_observables(const std::string& regime, const std::vector<std::string>& obs) {
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"strong", {"na", "nb", "ntot", "purity"}},
        {"weak", {"na", "nc", "nd", "ntot", "W", "EN", "purity"}},
        {"squeezing", {"nf"}},
    };
    const auto& ok = allowed.at(regime);
    std::set<std::string> seen;
    for (const auto& name : obs) {
        if (!ok.count(name))
            throw ConfigError("observable '" + name + "' is not available in regime = " + regime);
        if (!seen.insert(name).second)
            throw ConfigError("observable '" + name + "' listed twice");
    }
    if (obs.empty()) throw ConfigError("experiment.observables must not be empty");
}

}  // namespace detail

// Fill in the auto fields (window, observables, truncation dims, sector cap)
// and validate the whole config. Idempotent: resolving a resolved config is
// the identity, which is what makes emitted manifests rerunnable.
inline ExperimentConfig resolved(ExperimentConfig e) {
    detail::check_label(e.label);
    if (e.regime != "strong" && e.regime != "weak" && e.regime != "squeezing")
        throw ConfigError("experiment.regime must be strong, weak, or squeezing (got '" +
                          e.regime + "')");
    if (e.mode != "trajectory" && e.mode != "steady")
        throw ConfigError("experiment.mode must be trajectory or steady (got '" + e.mode + "')");
    if (e.n_samples < 2) throw ConfigError("experiment.n_samples must be >= 2");
    if (e.t_final == 0.0) e.t_final = (e.regime == "squeezing") ? 10.0 : 1.0;
    if (!(e.t_final > 0.0)) throw ConfigError("experiment.t_final must be > 0");

    if (e.regime == "squeezing") {
        if (e.mode != "trajectory")
            throw ConfigError("the squeezing regime has no damping; mode must be trajectory");
        if (!e.occupations.empty() || e.dark_n >= 0)
            throw ConfigError("the squeezing regime starts from vacuum; [initial] does not apply");
        if (e.observables.empty()) e.observables = {"nf"};
        detail::check_observables(e.regime, e.observables);
        SqueezingParams p{e.J_g, e.U_ggN};
        detail::check_squeezing(p);  // positivity and stability of the quadratic model
        return e;
    }

    const bool strong = e.regime == "strong";
    if (e.observables.empty())
        e.observables = strong ? std::vector<std::string>{"na", "nb"}
                               : std::vector<std::string>{"na", "nc", "nd"};
    detail::check_observables(e.regime, e.observables);

    if (e.N < 1) throw ConfigError("model.N must be a positive integer");
    if (!strong && e.N % 2 != 0)
        throw ConfigError("model.N must be even in regime = weak (half the atoms per well)");
    if (e.kappa < 0.0) throw ConfigError("model.kappa must be >= 0");
    if (strong && e.chi != 0.0) throw ConfigError("model.chi applies to the weak regime only");

    if (e.dark_n >= 0) {
        if (strong) throw ConfigError("initial.dark_n applies to the weak regime only");
        if (!e.occupations.empty())
            throw ConfigError("set exactly one of initial.occupations and initial.dark_n");
    } else if (e.occupations.empty()) {
        e.occupations = strong ? std::vector<int>{0, 1} : std::vector<int>{0, 1, 0};
    }
    const std::size_t n_modes = strong ? 2 : 3;
    if (e.dark_n < 0 && e.occupations.size() != n_modes)
        throw ConfigError("initial.occupations needs " + std::to_string(n_modes) +
                          " entries in regime = " + e.regime);
    int total = 0;
    if (e.dark_n >= 0) {
        total = e.dark_n;
    } else {
        for (int occ : e.occupations) {
            if (occ < 0) throw ConfigError("initial.occupations entries must be >= 0");
            total += occ;
        }
    }

    if (e.photon_dim == 0) e.photon_dim = total + 2;
    if (e.atomic_dim == 0) e.atomic_dim = total + 2;
    if (e.photon_dim < 2 || e.atomic_dim < 2)
        throw ConfigError("model truncation dims must be >= 2");
    if (e.dark_n >= 0 && e.dark_n > e.atomic_dim - 1)
        throw ConfigError("initial.dark_n exceeds model.atomic_dim - 1");
    if (e.dark_n < 0) {
        if (e.occupations[0] > e.photon_dim - 1)
            throw ConfigError("initial photon occupation exceeds model.photon_dim - 1");
        for (std::size_t i = 1; i < e.occupations.size(); ++i)
            if (e.occupations[i] > e.atomic_dim - 1)
                throw ConfigError("initial occupation exceeds model.atomic_dim - 1");
    }

    if (e.sector_max == kSectorAuto) e.sector_max = total;
    if (e.sector_max < kSectorAuto)
        throw ConfigError("model.sector_max must be >= -2");
    if (e.sector_max >= 0 && e.sector_max < total)
        throw ConfigError("model.sector_max is below the initial total excitation " +
                          std::to_string(total));

    if (!(e.rel_tol > 0.0) || !(e.abs_tol > 0.0))
        throw ConfigError("integrator tolerances must be > 0");
    return e;
}

// Parse an INI config into an (unresolved) ExperimentConfig. Unknown sections
// and keys are hard errors; section applicability depends on the regime.
inline ExperimentConfig parse_experiment_config(const Config& c) {
    c.enforce_schema(detail::experiment_schema());
    ExperimentConfig e;
    e.regime = c.get_string("experiment", "regime", e.regime);
    e.label = c.get_string("experiment", "label", e.label);
    e.mode = c.get_string("experiment", "mode", e.mode);
    e.t_final = c.get_double("experiment", "t_final", e.t_final);
    e.n_samples = static_cast<int>(c.get_int("experiment", "n_samples", e.n_samples));
    if (c.has("experiment", "observables"))
        e.observables = c.get_list("experiment", "observables");

    if (e.regime == "squeezing") {
        for (const char* section : {"model", "initial"})
            if (c.has_section(section))
                throw ConfigError(std::string("[") + section +
                                  "] does not apply to regime = squeezing");
    } else if (c.has_section("squeezing")) {
        throw ConfigError("[squeezing] applies to regime = squeezing only");
    }

    e.N = c.get_int("model", "N", e.N);
    e.kappa = c.get_double("model", "kappa", e.kappa);
    e.detuning = c.get_double("model", "detuning", e.detuning);
    e.chi = c.get_double("model", "chi", e.chi);
    e.photon_dim = static_cast<int>(c.get_int("model", "photon_dim", e.photon_dim));
    e.atomic_dim = static_cast<int>(c.get_int("model", "atomic_dim", e.atomic_dim));
    e.sector_max = static_cast<int>(c.get_int("model", "sector_max", e.sector_max));

    if (c.has("initial", "occupations") && c.has("initial", "dark_n"))
        throw ConfigError("set exactly one of initial.occupations and initial.dark_n");
    if (c.has("initial", "occupations")) e.occupations = c.get_int_list("initial", "occupations");
    if (c.has("initial", "dark_n")) e.dark_n = static_cast<int>(c.get_int("initial", "dark_n"));

    e.rel_tol = c.get_double("integrator", "rel_tol", e.rel_tol);
    e.abs_tol = c.get_double("integrator", "abs_tol", e.abs_tol);

    e.J_g = c.get_double("squeezing", "J_g", e.J_g);
    e.U_ggN = c.get_double("squeezing", "U_ggN", e.U_ggN);

    e.preset = c.get_string("manifest", "preset", e.preset);
    return e;
}

// Canonical text form of a resolved config: fixed section and key order, so
// equal configs serialize to equal bytes. This is both the CSV metadata block
// and the manifest file, and it parses back through parse_experiment_config.
inline std::string canonical_config_text(const ExperimentConfig& e) {
    std::ostringstream out;
    auto kv = [&out](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    out << "[experiment]\n";
    kv("label", e.label);
    kv("mode", e.mode);
    kv("n_samples", std::to_string(e.n_samples));
    kv("observables", detail::join_list(e.observables, [](const std::string& s) { return s; }));
    kv("regime", e.regime);
    kv("t_final", detail::format_double(e.t_final));
    if (e.regime == "squeezing") {
        out << "\n[squeezing]\n";
        kv("J_g", detail::format_double(e.J_g));
        kv("U_ggN", detail::format_double(e.U_ggN));
    } else {
        out << "\n[model]\n";
        kv("N", std::to_string(e.N));
        kv("atomic_dim", std::to_string(e.atomic_dim));
        kv("chi", detail::format_double(e.chi));
        kv("detuning", detail::format_double(e.detuning));
        kv("kappa", detail::format_double(e.kappa));
        kv("photon_dim", std::to_string(e.photon_dim));
        kv("sector_max", std::to_string(e.sector_max));
        out << "\n[initial]\n";
        if (e.dark_n >= 0)
            kv("dark_n", std::to_string(e.dark_n));
        else
            kv("occupations",
               detail::join_list(e.occupations, [](int v) { return std::to_string(v); }));
        out << "\n[integrator]\n";
        kv("abs_tol", detail::format_double(e.abs_tol));
        kv("rel_tol", detail::format_double(e.rel_tol));
    }
    out << "\n[manifest]\n";
    if (!e.preset.empty()) kv("preset", e.preset);
    kv("tool", "dwell");
    kv("version", kVersion);
    return out.str();
}

struct RunResult {
    ExperimentConfig config;  // resolved
    std::string time_label;   // "gt", or "Jg_t" in the squeezing regime
    std::vector<double> times;
    std::vector<std::string> columns;  // configured order
    std::map<std::string, std::vector<double>> series;
    TrajectoryDiagnostics diagnostics{};
    bool has_diagnostics = false;   // false for the closed-form squeezing route
    DenseMatrix final_state;        // full product space, density matrix runs only
};

namespace detail {

struct PreparedModel {
    explicit PreparedModel(ModeLayout l) : layout(std::move(l)) {}

    ModeLayout layout;
    SectorBasis sector;  // meaningful only when use_sector
    bool use_sector = false;
    SparseOperator hamiltonian;  // restricted when use_sector
    SparseOperator photon_annihilation;
    DensityMatrix rho0;
    std::vector<std::pair<std::string, SparseOperator>> linear;
    std::vector<std::pair<std::string, DerivedObservable>> derived;
    std::vector<std::pair<std::string, SparseOperator>> leakage;
};

inline PreparedModel prepare_model(const ExperimentConfig& cfg) {
    ModelParams mp;
    mp.g = 1.0;
    mp.N = cfg.N;
    mp.detuning = cfg.detuning;
    mp.chi = cfg.chi;
    mp.kappa = cfg.kappa;
    mp.photon_dim = cfg.photon_dim;
    mp.atomic_dim = cfg.atomic_dim;
    const bool strong = cfg.regime == "strong";

    PreparedModel m{strong ? strong_layout(mp) : weak_layout(mp)};
    const SparseOperator h_full =
        strong ? build_strong_tunneling(mp, m.layout) : build_weak_tunneling(mp, m.layout);
    const SparseOperator a_full = annihilation(m.layout, "a");

    m.use_sector = cfg.sector_max >= 0;
    if (m.use_sector) m.sector = excitation_sector(m.layout, cfg.sector_max);
    auto fit = [&m](const SparseOperator& op) {
        return m.use_sector ? restrict_operator(op, m.sector) : op;
    };
    m.hamiltonian = fit(h_full);
    m.photon_annihilation = fit(a_full);

    const StateVector psi0 = cfg.dark_n >= 0
                                 ? dark_state_weak(m.layout, cfg.dark_n)
                                 : StateVector::basis_state(m.layout, cfg.occupations);
    if (m.use_sector) {
        // the initial state lies inside the sector by construction
        m.rho0 = DensityMatrix::pure(
            StateVector(restrict_vector(psi0.amplitudes(), m.sector)));
    } else {
        m.rho0 = DensityMatrix::pure(psi0);
    }

    for (const std::string& name : cfg.observables) {
        if (name == "W") {
            const WitnessOperators w = make_witness_operators(m.layout);
            const WitnessOperators wr{fit(w.nc_nd), fit(w.c_ddag)};
            m.derived.emplace_back(name, [wr](double, const DenseMatrix& rho) {
                return entanglement_witness(rho, wr);
            });
        } else if (name == "EN") {
            const ModeLayout layout = m.layout;
            const SectorBasis sector = m.sector;
            const bool use_sector = m.use_sector;
            m.derived.emplace_back(name, [layout, sector, use_sector](double,
                                                                      const DenseMatrix& rho) {
                const DenseMatrix full = use_sector ? embed_matrix(rho, sector) : rho;
                const ReducedDensity red = partial_trace(full, layout, {"c", "d"});
                return logarithmic_negativity(red.matrix, red.layout, {"d"});
            });
        } else if (name == "purity") {
            m.derived.emplace_back(name, [](double, const DenseMatrix& rho) {
                return std::real((rho * rho).trace());
            });
        } else if (name == "na") {
            m.linear.emplace_back(name, fit(number_operator(m.layout, "a")));
        } else if (name == "nb") {
            m.linear.emplace_back(name, fit(number_operator(m.layout, "b")));
        } else if (name == "nc") {
            m.linear.emplace_back(name, fit(number_operator(m.layout, "c")));
        } else if (name == "nd") {
            m.linear.emplace_back(name, fit(number_operator(m.layout, "d")));
        } else {  // ntot; anything else was rejected during resolution
            m.linear.emplace_back(name, fit(total_number_operator(m.layout)));
        }
    }
    for (const std::string& lbl : m.layout.labels())
        m.leakage.emplace_back(lbl, fit(top_level_projector(m.layout, lbl)));
    return m;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& raw) {
    const ExperimentConfig cfg = resolved(raw);
    RunResult res;
    res.config = cfg;
    res.columns = cfg.observables;

    if (cfg.regime == "squeezing") {
        // Closed-form series evaluation; the time axis is dimensionless J_g t.
        const SqueezingParams p{cfg.J_g, cfg.U_ggN};
        res.time_label = "Jg_t";
        res.times = detail::uniform_grid(cfg.t_final, cfg.n_samples);
        std::vector<double>& nf = res.series["nf"];
        nf.reserve(res.times.size());
        for (double jt : res.times) nf.push_back(mean_asymmetric_excitation(p, jt / cfg.J_g));
        return res;
    }

    detail::PreparedModel m = detail::prepare_model(cfg);
    const std::vector<CollapseChannel> collapse = {{m.photon_annihilation, cfg.kappa}};
    res.time_label = "gt";

    if (cfg.mode == "steady") {
        const DensityMatrix ss = steady_state(m.rho0, m.hamiltonian, collapse,
                                              SteadyStateMethod::EvolveToConvergence);
        const DenseMatrix& rho = ss.matrix();
        res.times = {0.0};
        for (const auto& [name, op] : m.linear)
            res.series[name] = {std::real(expectation(op, rho))};
        for (const auto& [name, fn] : m.derived) res.series[name] = {fn(0.0, rho)};
        res.diagnostics.max_trace_drift = std::abs(ss.trace() - Complex(1.0, 0.0));
        res.diagnostics.max_hermiticity_defect = ss.hermiticity_defect();
        res.diagnostics.min_eigenvalue = ss.min_eigenvalue();
        res.has_diagnostics = true;
        res.final_state = m.use_sector ? embed_matrix(rho, m.sector) : rho;
        return res;
    }

    EvolutionSpec spec;
    spec.hamiltonian = m.hamiltonian;
    spec.collapse = collapse;
    spec.t_final = cfg.t_final;
    spec.n_samples = cfg.n_samples;
    spec.rel_tol = cfg.rel_tol;
    spec.abs_tol = cfg.abs_tol;
    Trajectory traj = evolve(m.rho0, spec, m.linear, m.derived, m.leakage);
    res.times = std::move(traj.times);
    for (const std::string& col : res.columns) res.series[col] = std::move(traj.series.at(col));
    res.diagnostics = traj.diagnostics;
    res.has_diagnostics = true;
    res.final_state = m.use_sector ? embed_matrix(traj.final_state.matrix(), m.sector)
                                   : traj.final_state.matrix();
    return res;
}

// First time from which the series stays within 1% of its final value.
inline double saturation_time(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size() || times.empty())
        throw DomainError("saturation_time: empty series or size mismatch");
    const double target = values.back();
    const double band = 0.01 * std::abs(target);
    for (std::size_t j = values.size() - 1; j > 0; --j)
        if (std::abs(values[j - 1] - target) > band) return times[j];
    return times.front();
}

namespace detail {

inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const fs::path dir = path.parent_path();
    if (!dir.empty()) {
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
}

inline std::string commented_block(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << (line.empty() ? "#" : "# " + line) << "\n";
    return out.str();
}

}  // namespace detail

inline std::filesystem::path write_curve_csv(const RunResult& r, const std::string& column,
                                             const std::filesystem::path& out_dir) {
    const auto it = r.series.find(column);
    if (it == r.series.end())
        throw DomainError("write_curve_csv: no series named '" + column + "'");
    std::ostringstream body;
    body << detail::commented_block(canonical_config_text(r.config));
    body << r.time_label << "," << column << "\n";
    const std::vector<double>& values = it->second;
    for (std::size_t i = 0; i < r.times.size(); ++i)
        body << detail::format_double(r.times[i]) << "," << detail::format_double(values[i])
             << "\n";
    const std::filesystem::path path = out_dir / (r.config.label + "_" + column + ".csv");
    detail::atomic_write(path, body.str());
    return path;
}

inline std::filesystem::path write_manifest(const RunResult& r,
                                            const std::filesystem::path& out_dir) {
    const std::filesystem::path path = out_dir / (r.config.label + "_manifest.ini");
    detail::atomic_write(path, canonical_config_text(r.config));
    return path;
}

inline std::vector<std::filesystem::path> write_outputs(const RunResult& r,
                                                        const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> files;
    for (const std::string& col : r.columns) files.push_back(write_curve_csv(r, col, out_dir));
    files.push_back(write_manifest(r, out_dir));
    return files;
}

// The figure presets. Every preset pins kappa = 100, zero detuning, zero chi,
// tight integrator tolerances, and a 400-sample window; dims resolve from the
// initial excitation.
inline std::vector<ExperimentConfig> preset_configs(const std::string& name) {
    const std::vector<long long> atom_numbers = {5000, 10000, 20000};
    std::vector<ExperimentConfig> out;
    auto base = [&name](const std::string& regime) {
        ExperimentConfig e;
        e.regime = regime;
        e.mode = "trajectory";
        e.t_final = (regime == "squeezing") ? 10.0 : 1.0;
        e.n_samples = 400;
        e.kappa = 100.0;
        e.detuning = 0.0;
        e.chi = 0.0;
        e.rel_tol = 1e-10;
        e.abs_tol = 1e-12;
        e.preset = name;
        return e;
    };
    if (name == "fig2") {
        for (long long n : atom_numbers) {
            ExperimentConfig e = base("strong");
            e.N = n;
            e.label = "fig2_N" + std::to_string(n);
            e.observables = {"na", "nb"};
            e.occupations = {0, 1};
            out.push_back(resolved(e));
        }
    } else if (name == "fig3" || name == "fig4") {
        for (long long n : atom_numbers) {
            ExperimentConfig e = base("weak");
            e.N = n;
            e.label = name + "_N" + std::to_string(n);
            e.observables = (name == "fig3") ? std::vector<std::string>{"na", "nc", "nd"}
                                             : std::vector<std::string>{"W", "EN"};
            e.occupations = {0, 1, 0};
            out.push_back(resolved(e));
        }
    } else if (name == "fig5") {
        for (int n : {1, 2, 3}) {
            ExperimentConfig e = base("weak");
            e.N = 5000;
            e.label = "fig5_n" + std::to_string(n);
            e.observables = {"W", "EN"};
            e.occupations = {0, n, 0};
            out.push_back(resolved(e));
        }
    } else if (name == "figA") {
        for (int u : {1, 5, 10}) {
            ExperimentConfig e = base("squeezing");
            e.label = "figA_U" + std::to_string(u);
            e.observables = {"nf"};
            e.J_g = 1.0;
            e.U_ggN = static_cast<double>(u);
            out.push_back(resolved(e));
        }
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected fig2|fig3|fig4|fig5|figA)");
    }
    return out;
}

// Apply one sweep-axis value to a base config. Axes that change the initial
// excitation (n, dark_n) reset the truncation dims and sector cap to auto so
// the basis refits each point.
inline ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& axis, double value) {
    auto integral = [&axis, value]() {
        const double r = std::round(value);
        if (std::abs(value - r) > 1e-9 || r < 0.0)
            throw ConfigError("sweep axis " + axis + " needs a nonnegative integer (got " +
                              detail::format_double(value) + ")");
        return static_cast<long long>(r);
    };
    auto refit_basis = [&cfg]() {
        cfg.photon_dim = 0;
        cfg.atomic_dim = 0;
        cfg.sector_max = kSectorAuto;
    };
    if (axis == "N") {
        cfg.N = integral();
    } else if (axis == "kappa") {
        cfg.kappa = value;
    } else if (axis == "detuning") {
        cfg.detuning = value;
    } else if (axis == "chi") {
        cfg.chi = value;
    } else if (axis == "t_final") {
        cfg.t_final = value;
    } else if (axis == "n") {
        if (cfg.regime != "weak")
            throw ConfigError("sweep axis n (initial excitation) applies to the weak regime");
        cfg.occupations = {0, static_cast<int>(integral()), 0};
        cfg.dark_n = -1;
        refit_basis();
    } else if (axis == "dark_n") {
        if (cfg.regime != "weak")
            throw ConfigError("sweep axis dark_n applies to the weak regime");
        cfg.dark_n = static_cast<int>(integral());
        cfg.occupations.clear();
        refit_basis();
    } else if (axis == "U_ggN") {
        cfg.U_ggN = value;
    } else if (axis == "J_g") {
        cfg.J_g = value;
    } else {
        throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    std::string tag = detail::format_double(value);
    std::erase(tag, '+');  // exponent signs are noise in file names
    cfg.label += "_" + axis + tag;
    return cfg;
}

struct SweepOutput {
    std::string axis;
    std::vector<double> values;
    std::vector<RunResult> runs;  // axis order
    std::vector<std::filesystem::path> files;
    std::filesystem::path summary_path;
};

// Run one point per axis value (concurrently up to `workers`), write each
// point's curves, then a summary CSV with one row per value: the final value
// of every observable and, for trajectory runs, its saturation time.
inline SweepOutput run_sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<double>& values, int workers,
                             const std::filesystem::path& out_dir) {
    if (values.empty()) throw ConfigError("sweep: axis value list is empty");
    if (workers < 1) throw ConfigError("sweep: workers must be >= 1");

    std::vector<ExperimentConfig> points;
    points.reserve(values.size());
    std::set<std::string> labels;
    for (double v : values) {
        points.push_back(resolved(apply_axis(base, axis, v)));
        if (!labels.insert(points.back().label).second)
            throw ConfigError("sweep: duplicate axis value " + detail::format_double(v));
    }

    std::vector<RunResult> runs(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            try {
                runs[i] = run_experiment(points[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min<std::size_t>(workers, points.size());
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    SweepOutput out;
    out.axis = axis;
    out.values = values;
    out.runs = std::move(runs);
    for (const RunResult& r : out.runs) {
        std::vector<std::filesystem::path> files = write_outputs(r, out_dir);
        out.files.insert(out.files.end(), files.begin(), files.end());
    }

    const bool with_tsat = base.mode != "steady";
    std::ostringstream body;
    body << detail::commented_block(canonical_config_text(out.runs.front().config));
    body << "# sweep_axis = " << axis << "\n";
    body << "# sweep_values = "
         << detail::join_list(values, [](double v) { return detail::format_double(v); }) << "\n";
    body << axis;
    for (const std::string& col : out.runs.front().columns) {
        body << ",steady_" << col;
        if (with_tsat) body << ",tsat_" << col;
    }
    body << "\n";
    for (std::size_t i = 0; i < out.runs.size(); ++i) {
        const RunResult& r = out.runs[i];
        body << detail::format_double(values[i]);
        for (const std::string& col : r.columns) {
            const std::vector<double>& series = r.series.at(col);
            body << "," << detail::format_double(series.back());
            if (with_tsat) body << "," << detail::format_double(saturation_time(r.times, series));
        }
        body << "\n";
    }
    out.summary_path = out_dir / (base.label + "_sweep_" + axis + ".csv");
    detail::atomic_write(out.summary_path, body.str());
    out.files.push_back(out.summary_path);
    return out;
}

}  // namespace dwell

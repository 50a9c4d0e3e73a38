#include "blowuplab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "blowuplab/center_dynamics.hpp"
#include "blowuplab/geometry.hpp"
#include "blowuplab/io.hpp"
#include "blowuplab/lorentz.hpp"
#include "blowuplab/modulation.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/shooting.hpp"
#include "blowuplab/similarity_pde.hpp"
#include "blowuplab/spectral.hpp"

namespace blowuplab::cli {

namespace {

using json = nlohmann::ordered_json;

struct Context {
    std::string out_dir = "out";
    std::string hash;
    bool dry_run = false;
    std::vector<std::string> planned;

    std::string path(const std::string& name) const { return (std::filesystem::path(out_dir) / name).string(); }
    void emit(const std::string& name, const std::string& content) {
        planned.push_back(path(name));
        if (!dry_run) io::write_atomic(path(name), content);
    }
    std::string json_text(json j) const {
        json wrapped;
        wrapped["version"] = io::version();
        wrapped["config_hash"] = hash;
        for (auto& [k, v] : j.items()) wrapped[k] = v;
        return wrapped.dump(2) + "\n";
    }
};

Vec parse_list(const std::string& text, const std::string& field) {
    Vec out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", field, item));
        }
    }
    return out;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& field) {
    const auto pos = text.find(':');
    if (pos == std::string::npos) throw ConfigError(fmt::format("{}: expected lo:hi, got '{}'", field, text));
    const Vec lo = parse_list(text.substr(0, pos), field), hi = parse_list(text.substr(pos + 1), field);
    if (lo.size() != 1 || hi.size() != 1 || !(lo[0] > 0.0) || !(hi[0] > lo[0]))
        throw ConfigError(fmt::format("{}: need 0 < lo < hi, got '{}'", field, text));
    return {lo[0], hi[0]};
}

std::string num(double v) { return io::fmt_double(v); }

// ---------------------------------------------------------------- centers

struct CentersArgs {
    double p = 3.0;
    std::optional<int> k;
    double c1 = 1.0, eta_rest = 0.3, delta = 1.0;
    bool demo = false, lyapunov = false, compact = false, rate = false, perturbed = false;
    int samples = 100;
    double horizon = 20.0;
    std::uint64_t seed = 1;
    std::string s_values = "5,50,500";
    double eta = 0.2, A = 2.0;
};

centers::ModelParams model_of(const CentersArgs& a, int k) {
    centers::ModelParams m;
    m.p = a.p;
    m.k = k;
    m.c1 = a.c1;
    m.eta_rest = a.eta_rest;
    m.delta = a.delta;
    m.validate();
    return m;
}

int cmd_centers(const CentersArgs& a, Context& ctx) {
    if (!(a.demo || a.lyapunov || a.compact || a.rate || a.perturbed))
        throw ConfigError("centers: no action requested (use --demo, --check-lyapunov, --check-compact, --rate or "
                          "--perturbed)");
    if ((a.demo || a.rate || a.perturbed) && !a.k)
        throw ConfigError("centers.k is required for --demo, --rate and --perturbed");
    if (ctx.dry_run) {
        for (const char* f : {"centers_bar_zeta.csv", "centers_trajectory.csv", "centers_lyapunov.csv",
                              "centers_compact.json", "centers_rate.json", "centers_perturbed.csv"})
            ctx.planned.push_back(ctx.path(f));
        return 0;
    }
    if (a.demo) {
        const auto sys = centers::CenterSystem::make(model_of(a, *a.k));
        const Vec svals = parse_list(a.s_values, "centers.s-values");
        io::CsvTable t;
        t.columns.push_back("s");
        for (int i = 1; i <= *a.k; ++i) t.columns.push_back(fmt::format("zeta_{}", i));
        t.columns.push_back("residual");
        fmt::print("s");
        for (int i = 1; i <= *a.k; ++i) fmt::print(" zeta_{}", i);
        fmt::print(" residual\n");
        for (double s : svals) {
            const Vec z = centers::bar_zeta(sys, s);
            const Vec f = centers::rhs_tl(sys, z), zd = centers::bar_zeta_dot(sys, s);
            double r = 0.0;
            for (int i = 0; i < *a.k; ++i) r = std::max(r, std::abs(f[i] - zd[i]));
            Vec row{s};
            row.insert(row.end(), z.begin(), z.end());
            row.push_back(r);
            t.add(row);
            fmt::print("{}", num(s));
            for (double v : z) fmt::print(" {}", num(v));
            fmt::print(" {}\n", num(r));
        }
        ctx.emit("centers_bar_zeta.csv", t.str(ctx.hash));
        const Vec xi0 = centers::random_zero_sum(*a.k, 0.5, a.seed);
        const auto tr = centers::integrate_ptl(sys, xi0, a.horizon, 0.05);
        io::CsvTable traj;
        traj.columns.push_back("tau");
        for (int i = 1; i <= *a.k; ++i) traj.columns.push_back(fmt::format("xi_{}", i));
        traj.columns.push_back("B");
        traj.columns.push_back("b");
        for (std::size_t j = 0; j < tr.size(); ++j) {
            Vec row{tr.times[j]};
            row.insert(row.end(), tr.states[j].begin(), tr.states[j].end());
            const auto L = centers::lyapunov_bB(sys, tr.states[j]);
            row.push_back(L.b_max);
            row.push_back(L.b_min);
            traj.add(row);
        }
        ctx.emit("centers_trajectory.csv", traj.str(ctx.hash));
    }
    if (a.lyapunov) {
        std::vector<int> ks;
        if (a.k)
            ks.push_back(*a.k);
        else
            ks = {2, 3, 4, 5};
        io::CsvTable t{{"k", "sample", "max_violation_B", "max_violation_negb", "min_decrease_rate", "ok"}, {}};
        int violations = 0, total = 0;
        for (int k : ks) {
            const auto sys = centers::CenterSystem::make(model_of(a, k));
            std::vector<centers::MonotoneReport> reps(a.samples);
            numerics::parallel_for(a.samples, [&](int i) {
                const Vec xi0 = centers::random_zero_sum(k, 2.0, a.seed * 1000003ULL + 7919ULL * k + i);
                reps[i] = centers::check_monotone_lyapunov(sys, xi0, a.horizon);
            });
            for (int i = 0; i < a.samples; ++i) {
                const bool ok = reps[i].ok(1e-8, 1e-10);
                violations += ok ? 0 : 1;
                ++total;
                t.add({double(k), double(i), reps[i].max_violation_B, reps[i].max_violation_negb,
                       reps[i].min_decrease_rate, ok ? 1.0 : 0.0});
            }
        }
        ctx.emit("centers_lyapunov.csv", t.str(ctx.hash));
        fmt::print("lyapunov: {} samples, {} violations\n", total, violations);
        if (violations) throw NumericalError(fmt::format("lyapunov check: {} violations", violations));
    }
    if (a.compact) {
        const int k = a.k.value_or(4);
        const auto sys = centers::CenterSystem::make(model_of(a, k));
        const auto rep = centers::check_compact_stability(sys, a.eta, a.A, a.samples, a.horizon, a.seed);
        json j;
        j["k"] = k;
        j["eta"] = a.eta;
        j["A"] = a.A;
        j["samples"] = rep.n_samples;
        j["escapes"] = rep.escapes.size();
        j["inward_failures"] = rep.inward_failures;
        j["max_final_norm"] = rep.max_final_norm;
        ctx.emit("centers_compact.json", ctx.json_text(j));
        fmt::print("compact: {} samples, {} escapes\n", rep.n_samples, rep.escapes.size());
    }
    if (a.rate) {
        const auto sys = centers::CenterSystem::make(model_of(a, *a.k));
        json fits = json::array();
        for (int i = 0; i < std::max(1, std::min(a.samples, 10)); ++i) {
            const Vec xi0 = centers::random_zero_sum(*a.k, 1.0, a.seed + static_cast<std::uint64_t>(i));
            const auto fit = centers::convergence_rate(centers::integrate_ptl(sys, xi0, 40.0, 0.05));
            fits.push_back({{"sample", i}, {"slope", fit.slope}, {"points", fit.points}, {"accepted", fit.accepted}});
            fmt::print("rate sample {}: slope {}\n", i, num(fit.slope));
        }
        json j;
        j["k"] = *a.k;
        j["fits"] = fits;
        ctx.emit("centers_rate.json", ctx.json_text(j));
    }
    if (a.perturbed) {
        const auto sys = centers::CenterSystem::make(model_of(a, *a.k));
        const double s0 = 10.0, s1 = 10.0 + a.horizon * 50.0, er = a.eta_rest;
        const auto rest = [er](int, double s) { return std::pow(s, -1.0 - er); };
        const auto res = centers::integrate_perturbed(sys, centers::bar_zeta(sys, s0), s0, s1, rest, er);
        io::CsvTable t{{"s", "deviation"}, {}};
        for (std::size_t j = 0; j < res.traj.size(); ++j) t.add({res.traj.times[j], res.deviation[j]});
        ctx.emit("centers_perturbed.csv", t.str(ctx.hash));
        fmt::print("perturbed: zeta0 {} C {}\n", num(res.zeta0), num(res.C));
    }
    return 0;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
    std::optional<int> k;
    int k_min = 2, k_max = 12;
};

int cmd_spectrum(const SpectrumArgs& a, Context& ctx) {
    const int lo = a.k ? *a.k : a.k_min, hi = a.k ? *a.k : a.k_max;
    if (lo < 2) throw ConfigError(fmt::format("spectrum.k must be at least 2, got {}", lo));
    if (hi < lo) throw ConfigError("spectrum: k-max below k-min");
    ctx.planned.push_back(ctx.path("spectrum_eigenvalues.csv"));
    if (ctx.dry_run) return 0;
    io::CsvTable t{{"k", "i", "lambda", "expected", "residual"}, {}};
    for (int k = lo; k <= hi; ++k) {
        const auto sd = spectral::exact_spectrum(k);
        fmt::print("k={}:", k);
        for (int i = 1; i <= k; ++i) {
            const double expect = -i * (i - 1) / 2.0;
            if (sd.eigenvalues[i - 1] != expect)
                throw NumericalError(fmt::format("spectrum: k = {} eigenvalue {} is {}, expected {}", k, i,
                                                 sd.eigenvalues[i - 1], expect));
            t.add({double(k), double(i), sd.eigenvalues[i - 1], expect, sd.max_residual});
            fmt::print(" {}", num(sd.eigenvalues[i - 1]));
        }
        fmt::print("  (residual {:.3e})\n", sd.max_residual);
        io::CsvTable basis;
        for (int i = 1; i <= k; ++i) basis.columns.push_back(fmt::format("e_{}", i));
        for (int r = 0; r < k; ++r) {
            Vec row(k);
            for (int c = 0; c < k; ++c) row[c] = sd.basis(r, c);
            basis.add(row);
        }
        ctx.emit(fmt::format("spectrum_basis_k{}.csv", k), basis.str(ctx.hash));
    }
    ctx.emit("spectrum_eigenvalues.csv", t.str(ctx.hash));
    return 0;
}

// ---------------------------------------------------------------- grid/evolve

struct GridArgs {
    double p = 3.0, chi_max = 10.0;
    int n = 2001;
    profiles::SpacePtr space() const { return profiles::Space::make(p, chi_max, n); }
};

void add_grid(CLI::App* sub, GridArgs& g) {
    sub->add_option("--p", g.p, "Nonlinearity exponent")->capture_default_str();
    sub->add_option("--n", g.n, "Grid nodes")->capture_default_str();
    sub->add_option("--chi-max", g.chi_max, "Half-width of the chi grid")->capture_default_str();
}

struct EvolveArgs {
    GridArgs grid;
    double ds = 2e-3, s0 = 0.0, s1 = 1.0, d = 0.0, nu = 0.0, cadence = 0.05;
    std::optional<double> mu;
    std::string scheme = "imex-cn", input, resume;
};

int cmd_evolve(const EvolveArgs& a, Context& ctx) {
    similarity::EvolveConfig cfg;
    cfg.ds = a.ds;
    cfg.scheme = similarity::parse_scheme(a.scheme);
    cfg.monitor_norms = true;
    cfg.validate();
    const auto sp = a.grid.space();
    double s0 = a.s0;
    profiles::PhaseProfile q0;
    if (!a.resume.empty()) {
        const auto c = similarity::read_checkpoint(a.resume, sp);
        q0 = c.state;
        s0 = c.s;
    } else if (!a.input.empty()) {
        q0 = io::parse_profile_csv(io::read_file(a.input), sp);
    } else {
        const double nu = a.mu ? *a.mu * std::exp(s0) : a.nu;
        q0 = profiles::kappa_star(sp, a.d, nu);
    }
    if (!(a.s1 > s0)) throw ConfigError(fmt::format("evolve.s1 must exceed the start time {}", s0));
    for (const char* f : {"evolve_series.csv", "evolve_final.csv", "evolve_final.csv.json"})
        ctx.planned.push_back(ctx.path(f));
    if (ctx.dry_run) return 0;
    similarity::EvolveCallbacks cb;
    cb.cadence = a.cadence;
    cb.keep_every = 0;
    cb.checkpoint_path = ctx.path("evolve_checkpoint.csv");
    cb.config_hash = ctx.hash;
    const auto res = similarity::evolve(q0, s0, a.s1, cfg, cb);
    io::CsvTable t{{"s", "energy", "h_norm"}, {}};
    for (std::size_t i = 0; i < res.energy_s.size(); ++i) t.add({res.energy_s[i], res.energy[i], res.norm[i]});
    ctx.emit("evolve_series.csv", t.str(ctx.hash));
    similarity::write_checkpoint(ctx.path("evolve_final.csv"), res.final_state, res.s_end, cfg.ds, ctx.hash);
    fmt::print("evolve: s = {} energy {} h_norm {}\n", num(res.s_end), num(res.energy.back()), num(res.norm.back()));
    return 0;
}

// ---------------------------------------------------------------- modulate

struct ModulateArgs {
    GridArgs grid;
    std::string input, zeta, nu, guess_zeta, guess_nu;
};

std::vector<profiles::SolitonParam> params_from(const Vec& zeta, const Vec& nu, const std::string& field) {
    if (zeta.size() != nu.size())
        throw ConfigError(fmt::format("{}: zeta and nu lists differ in length ({} vs {})", field, zeta.size(),
                                      nu.size()));
    std::vector<profiles::SolitonParam> out;
    for (std::size_t i = 0; i < zeta.size(); ++i) out.push_back(profiles::SolitonParam::from_zeta(zeta[i], nu[i]));
    return out;
}

int cmd_modulate(const ModulateArgs& a, Context& ctx) {
    const auto sp = a.grid.space();
    profiles::PhaseProfile v;
    std::vector<profiles::SolitonParam> guess;
    if (!a.input.empty()) {
        if (a.guess_zeta.empty()) throw ConfigError("modulate.guess-zeta is required with --input");
        v = io::parse_profile_csv(io::read_file(a.input), sp);
    } else {
        if (a.zeta.empty()) throw ConfigError("modulate.zeta is required without --input");
        const Vec z = parse_list(a.zeta, "modulate.zeta");
        const Vec n = a.nu.empty() ? Vec(z.size(), 0.0) : parse_list(a.nu, "modulate.nu");
        v = profiles::soliton_sum(sp, params_from(z, n, "modulate"));
        guess = params_from(z, n, "modulate");
    }
    if (!a.guess_zeta.empty()) {
        const Vec gz = parse_list(a.guess_zeta, "modulate.guess-zeta");
        const Vec gn = a.guess_nu.empty() ? Vec(gz.size(), 0.0) : parse_list(a.guess_nu, "modulate.guess-nu");
        guess = params_from(gz, gn, "modulate.guess");
    }
    ctx.planned.push_back(ctx.path("modulate_params.csv"));
    ctx.planned.push_back(ctx.path("modulate_q.csv"));
    if (ctx.dry_run) return 0;
    const auto st = modulation::modulate(v, guess);
    io::CsvTable t{{"i", "zeta", "d", "nu", "zeta_star"}, {}};
    for (std::size_t i = 0; i < st.params.size(); ++i) {
        const auto& p = st.params[i];
        t.add({double(i + 1), p.zeta(), p.d, p.nu, p.zeta_star()});
        fmt::print("soliton {}: zeta {} nu {}\n", i + 1, num(p.zeta()), num(p.nu));
    }
    fmt::print("q_norm {} residual {:.3e} iterations {}\n", num(st.q_norm), st.residual, st.iterations);
    ctx.emit("modulate_params.csv", t.str(ctx.hash));
    ctx.emit("modulate_q.csv", io::profile_csv(st.q, ctx.hash));
    return 0;
}

// ---------------------------------------------------------------- shoot

struct ShootArgs {
    GridArgs grid;
    int k = 2;
    double s0 = 30.0, target = 38.0, ds = 2e-3, cadence = 0.05, calib_horizon = 2.0, delta = 1.0;
    std::optional<double> c1;
    std::string search = "nested-bisection", scheme = "imex-cn";
    int max_runs = 800, outer = 24, inner = 24;
    bool resume = false;
};

json record_json(const shooting::ShootingRecord& r, const std::string& hash) {
    json j;
    j["nu_unit"] = r.nu_unit;
    j["s_exit"] = r.s_exit;
    j["s_detect"] = r.s_detect;
    j["exit"] = shooting::exit_kind_name(r.exit);
    j["exit_constraint"] = r.exit_constraint;
    j["N_at_exit"] = std::isfinite(r.N_at_exit) ? json(r.N_at_exit) : json(nullptr);
    j["nu_last"] = r.nu_last;
    j["max_non_nu"] = r.max_non_nu;
    j["config_hash"] = hash;
    return j;
}

shooting::ShootingRecord record_from_json(const json& j) {
    shooting::ShootingRecord r;
    r.nu_unit = j.at("nu_unit").get<Vec>();
    r.s_exit = j.at("s_exit").get<double>();
    r.s_detect = j.at("s_detect").get<double>();
    const std::string e = j.at("exit").get<std::string>();
    for (auto k : {shooting::ExitKind::survived, shooting::ExitKind::nu, shooting::ExitKind::q, shooting::ExitKind::phi,
                   shooting::ExitKind::structural, shooting::ExitKind::blowup})
        if (shooting::exit_kind_name(k) == e) r.exit = k;
    r.exit_constraint = j.at("exit_constraint").get<std::string>();
    r.N_at_exit = j.at("N_at_exit").is_null() ? std::nan("") : j.at("N_at_exit").get<double>();
    r.nu_last = j.at("nu_last").get<Vec>();
    r.max_non_nu = j.at("max_non_nu").get<double>();
    return r;
}

std::string key_of(const Vec& u) {
    std::string s;
    for (double v : u) s += num(v) + ";";
    return s;
}

int cmd_shoot(const ShootArgs& a, Context& ctx) {
    shooting::ShootingConfig cfg;
    cfg.params.p = a.grid.p;
    cfg.params.k = a.k;
    cfg.params.delta = a.delta;
    cfg.s0 = a.s0;
    cfg.s_target = a.target;
    cfg.chi_max = a.grid.chi_max;
    cfg.n = a.grid.n;
    cfg.evolve.ds = a.ds;
    cfg.evolve.scheme = similarity::parse_scheme(a.scheme);
    cfg.search = shooting::parse_search_mode(a.search);
    cfg.cadence = a.cadence;
    if (a.c1) cfg.params.c1 = *a.c1;
    cfg.validate();
    if (cfg.search == shooting::SearchMode::nested_bisection && a.k != 2)
        throw ConfigError("shoot.search nested-bisection needs k = 2 (use grid-refine)");
    for (const char* f : {"shoot_ledger.jsonl", "shoot_frontier.csv", "shoot_track.csv", "shoot_report.json"})
        ctx.planned.push_back(ctx.path(f));
    if (ctx.dry_run) return 0;

    json calib = nullptr;
    if (!a.c1) {
        const auto cal = shooting::calibrate_c1(cfg, a.calib_horizon);
        cfg.params.c1 = cal.c1;
        calib = {{"c1", cal.c1}, {"history", cal.c1_history}, {"converged", cal.converged}};
        fmt::print("c1 calibrated to {} ({} iterations)\n", num(cal.c1), cal.fits.size());
    }

    std::map<std::string, shooting::ShootingRecord> cache;
    std::vector<json> ledger;
    const std::string ledger_path = ctx.path("shoot_ledger.jsonl");
    if (a.resume && std::filesystem::exists(ledger_path)) {
        std::istringstream in(io::read_file(ledger_path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const json j = json::parse(line);
            if (j.value("config_hash", "") != ctx.hash) continue;
            const auto r = record_from_json(j);
            cache[key_of(r.nu_unit)] = r;
            ledger.push_back(j);
        }
        fmt::print("resume: {} cached runs\n", cache.size());
    }
    auto flush_ledger = [&] {
        std::string text = io::header_comment(ctx.hash);
        for (const auto& j : ledger) text += j.dump() + "\n";
        io::write_atomic(ledger_path, text);
    };
    const shooting::Runner runner = [&](const Vec& u) {
        const auto it = cache.find(key_of(u));
        if (it != cache.end()) return it->second;
        auto r = shooting::run_until_exit(cfg, u);
        ledger.push_back(record_json(r, ctx.hash));
        flush_ledger();
        cache[key_of(u)] = r;
        fmt::print("run u = ({}) s_exit {} via {}\n", key_of(u), num(r.s_exit), r.exit_constraint);
        std::fflush(stdout);
        return r;
    };
    shooting::SearchOptions so;
    so.max_runs = a.max_runs;
    so.outer_iters = a.outer;
    so.inner_iters = a.inner;
    const auto res = shooting::search_nu(runner, cfg.params.k, cfg.s_target, cfg.search, so);
    flush_ledger();

    io::CsvTable frontier;
    for (int i = 1; i <= a.k; ++i) frontier.columns.push_back(fmt::format("u_{}", i));
    frontier.columns.push_back("s_exit");
    frontier.columns.push_back("survived");
    for (const auto& j : ledger) {
        const auto r = record_from_json(j);
        Vec row = r.nu_unit;
        row.push_back(r.s_exit);
        row.push_back(r.survived() ? 1.0 : 0.0);
        frontier.add(row);
    }
    ctx.emit("shoot_frontier.csv", frontier.str(ctx.hash));

    auto best = res.best;
    if (best.track.empty() && !best.nu_unit.empty()) best = shooting::run_until_exit(cfg, best.nu_unit);
    const auto sys = centers::CenterSystem::make(cfg.params);
    io::CsvTable track;
    track.columns.push_back("s");
    for (int i = 1; i <= a.k; ++i) track.columns.push_back(fmt::format("zeta_{}", i));
    for (int i = 1; i <= a.k; ++i) track.columns.push_back(fmt::format("nu_{}", i));
    for (const char* c : {"q_norm", "J", "Jbar", "Jhat", "Jtilde", "N"}) track.columns.push_back(c);
    for (const auto& t : best.track) {
        Vec row{t.s};
        row.insert(row.end(), t.zeta.begin(), t.zeta.end());
        row.insert(row.end(), t.nu.begin(), t.nu.end());
        for (double v : {t.q_norm, t.gaps.J, t.gaps.Jbar, t.gaps.Jhat, t.gaps.Jtilde, t.comps.N}) row.push_back(v);
        track.add(row);
    }
    ctx.emit("shoot_track.csv", track.str(ctx.hash));

    json rep;
    rep["success"] = res.success;
    rep["mode"] = shooting::search_mode_name(res.mode);
    rep["fell_back"] = res.fell_back;
    rep["runs"] = res.runs;
    rep["diagnostic"] = res.diagnostic;
    rep["c1"] = cfg.params.c1;
    rep["calibration"] = calib;
    rep["nu_star_unit"] = res.nu_star;
    rep["nu_star"] = shooting::rescale(sys.gamma, cfg.s0, res.nu_star);
    rep["best"] = record_json(best, ctx.hash);
    if (best.track.size() >= 4) {
        const auto tr = shooting::soliton_tracking_report(best.track, sys);
        rep["tracking"] = {{"gap_slopes", tr.gap_slopes},
                           {"target_slope", tr.target_slope},
                           {"max_slope_error", tr.max_slope_error},
                           {"zeta0", tr.zeta0},
                           {"phi1_tail_variation", tr.phi1_tail_variation},
                           {"max_non_nu", tr.max_non_nu}};
    }
    ctx.emit("shoot_report.json", ctx.json_text(rep));
    fmt::print("shoot: {} after {} runs, best s_exit {} at u = ({})\n", res.success ? "success" : "failure", res.runs,
               num(best.s_exit), key_of(res.nu_star));
    if (!res.success) {
        if (res.runs >= so.max_runs) throw BudgetError("shoot: run budget exhausted; " + res.diagnostic);
        throw NumericalError("shoot: no surviving parameter found; " + res.diagnostic);
    }
    return 0;
}

// ---------------------------------------------------------------- lorentz

struct LorentzArgs {
    GridArgs grid;
    Vec compose, prescribe;
    std::optional<double> boost;
};

int cmd_lorentz(const LorentzArgs& a, Context& ctx) {
    if (a.compose.empty() && a.prescribe.empty() && !a.boost)
        throw ConfigError("lorentz: no action requested (use --compose, --boost or --prescribe)");
    ctx.planned.push_back(ctx.path("lorentz.json"));
    if (ctx.dry_run) return 0;
    json j;
    if (!a.compose.empty()) {
        const double d = lorentz::d_compose(a.compose[0], a.compose[1]);
        j["compose"] = {{"d1", a.compose[0]}, {"d2", a.compose[1]}, {"d", d}};
        fmt::print("{}\n", num(d));
    }
    if (a.boost) {
        const auto sp = a.grid.space();
        const auto out = lorentz::lorentz_static(profiles::kappa(sp, 0.0), *a.boost);
        const auto ref = profiles::kappa(sp, *a.boost);
        double err = 0.0;
        for (int i = 0; i < sp->n(); ++i) err = std::max(err, std::abs(out.profile.w1[i] - ref.w1[i]));
        j["boost"] = {{"d", *a.boost}, {"max_error_vs_kappa", err}, {"extrapolated", out.extrapolated}};
        fmt::print("boost {}: max |T_d(kappa0) - kappa(d)| = {:.3e}\n", num(*a.boost), err);
    }
    if (!a.prescribe.empty()) {
        const double d = lorentz::prescribe_boost(a.prescribe[0], a.prescribe[1]);
        j["prescribe"] = {{"zeta0_sharp", a.prescribe[0]}, {"zeta0_target", a.prescribe[1]}, {"d", d}};
        fmt::print("d = {}\n", num(d));
    }
    ctx.emit("lorentz.json", ctx.json_text(j));
    return 0;
}

// ---------------------------------------------------------------- blowupset / plan

struct BlowupArgs {
    int k = 2;
    double p = 3.0, zeta0 = 0.0, gamma = 1.0, T0 = 1.0, x0 = 0.0;
    std::string scan = "1e-8:1e-3";
    int points = 21;
};

int cmd_blowupset(const BlowupArgs& a, Context& ctx) {
    geometry::CharPointModel m{a.k, a.zeta0, a.p, a.gamma, a.T0, a.x0};
    m.validate();
    const auto [lo, hi] = parse_range(a.scan, "blowupset.scan");
    if (!(hi < 0.5)) throw ConfigError("blowupset.scan: offsets must stay below 1/2");
    if (a.points < 2) throw ConfigError("blowupset.points must be at least 2");
    ctx.planned.push_back(ctx.path("blowupset.csv"));
    if (ctx.dry_run) return 0;
    io::CsvTable t{{"offset", "T_left", "T_right", "Tprime_left", "Tprime_right", "corr_left", "corr_right",
                    "asym_ratio", "expected_ratio", "fd_rel_err", "envelope_ok"},
                   {}};
    for (int i = 0; i < a.points; ++i) {
        const double r = lo * std::pow(hi / lo, double(i) / (a.points - 1));
        const double xl = a.x0 - r, xr = a.x0 + r, h = 1e-4 * r;
        const double cl = geometry::correction(m, xl), cr = geometry::correction(m, xr);
        const double fd = (geometry::predicted_T(m, xr + h) - geometry::predicted_T(m, xr - h)) / (2.0 * h);
        const double tp = geometry::predicted_Tprime(m, xr);
        const bool env = geometry::envelope(m, xl).contains() && geometry::envelope(m, xr).contains();
        t.add({r, geometry::predicted_T(m, xl), geometry::predicted_T(m, xr), geometry::predicted_Tprime(m, xl), tp, cl,
               cr, cr / cl, std::exp(-4.0 * a.zeta0), std::abs(fd - tp) / std::abs(tp), env ? 1.0 : 0.0});
    }
    ctx.emit("blowupset.csv", t.str(ctx.hash));
    fmt::print("blowupset: {} offsets in [{}, {}], asymmetry ratio {}\n", a.points, num(lo), num(hi),
               num(std::exp(-4.0 * a.zeta0)));
    return 0;
}

struct PlanArgs {
    std::string input;
    double p = 3.0, gamma = 1.0;
};

int cmd_plan(const PlanArgs& a, Context& ctx) {
    if (a.input.empty()) throw ConfigError("plan.input is required");
    json pts;
    try {
        pts = json::parse(io::read_file(a.input));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("plan.input: {}", e.what()));
    }
    if (!pts.is_array()) throw ConfigError("plan.input must hold a JSON array of point records");
    std::vector<geometry::PlanPoint> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& r = pts[i];
        for (const char* f : {"x", "T", "k", "zeta0"})
            if (!r.contains(f)) throw ConfigError(fmt::format("plan.input[{}].{} is required", i, f));
        points.push_back({r["x"].get<double>(), r["T"].get<double>(), r["k"].get<int>(), r["zeta0"].get<double>()});
    }
    const auto plan = geometry::multi_point_plan(points, a.p, a.gamma);
    ctx.planned.push_back(ctx.path("plan.json"));
    if (ctx.dry_run) return 0;
    json out = json::array();
    for (const auto& e : plan)
        out.push_back({{"x0", e.model.x0},
                       {"T0", e.model.T0},
                       {"k", e.model.k},
                       {"zeta0", e.model.zeta0},
                       {"p", e.model.p},
                       {"gamma", e.model.gamma_const},
                       {"shoot", {{"s0", e.shooting.s0},
                                  {"target", e.shooting.s_target},
                                  {"search", shooting::search_mode_name(e.shooting.search)}}}});
    json j;
    j["points"] = out;
    ctx.emit("plan.json", ctx.json_text(j));
    fmt::print("plan: {} points valid\n", plan.size());
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Multi-soliton blow-up toolkit for the semilinear wave equation", "blowuplab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Key-value config file with one section per subcommand");
    Context ctx;
    app.add_option("--out", ctx.out_dir, "Output directory")->capture_default_str();
    app.add_flag("--dry-run", ctx.dry_run, "Validate and print the plan without running");
    app.set_version_flag("--version", io::version());

    CentersArgs ca;
    auto* centers = app.add_subcommand("centers", "Center dynamics: explicit solution, Lyapunov and stability checks");
    centers->add_option("--p", ca.p)->capture_default_str();
    centers->add_option("--k", ca.k, "Number of solitons");
    centers->add_option("--c1", ca.c1)->capture_default_str();
    centers->add_option("--eta-rest", ca.eta_rest)->capture_default_str();
    centers->add_option("--delta", ca.delta)->capture_default_str();
    centers->add_flag("--demo", ca.demo, "Explicit solution table and a sample trajectory");
    centers->add_flag("--check-lyapunov", ca.lyapunov, "Monotonicity of the Lyapunov pair on random starts");
    centers->add_flag("--check-compact", ca.compact, "Invariance of the compact set");
    centers->add_flag("--rate", ca.rate, "Fitted convergence rates");
    centers->add_flag("--perturbed", ca.perturbed, "Perturbed center system");
    centers->add_option("--samples", ca.samples)->capture_default_str();
    centers->add_option("--horizon", ca.horizon)->capture_default_str();
    centers->add_option("--seed", ca.seed)->capture_default_str();
    centers->add_option("--s-values", ca.s_values)->capture_default_str();
    centers->add_option("--eta", ca.eta, "Compact-set margin")->capture_default_str();
    centers->add_option("--A", ca.A, "Compact-set upper bound")->capture_default_str();

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues and eigenvectors of the linearized center system");
    spectrum->add_option("--k", sa.k);
    spectrum->add_option("--k-min", sa.k_min)->capture_default_str();
    spectrum->add_option("--k-max", sa.k_max)->capture_default_str();

    EvolveArgs ea;
    auto* evolve = app.add_subcommand("evolve", "Evolve a profile in similarity variables");
    add_grid(evolve, ea.grid);
    evolve->add_option("--ds", ea.ds)->capture_default_str();
    evolve->add_option("--scheme", ea.scheme)->capture_default_str();
    evolve->add_option("--s0", ea.s0)->capture_default_str();
    evolve->add_option("--s1", ea.s1)->capture_default_str();
    evolve->add_option("--d", ea.d)->capture_default_str();
    evolve->add_option("--nu", ea.nu)->capture_default_str();
    evolve->add_option("--mu", ea.mu, "Start from kappa*(d, mu e^s0)");
    evolve->add_option("--cadence", ea.cadence)->capture_default_str();
    evolve->add_option("--input", ea.input, "Initial profile CSV");
    evolve->add_option("--resume", ea.resume, "Checkpoint CSV to continue from");

    ModulateArgs ma;
    auto* modulate = app.add_subcommand("modulate", "Decompose a profile into generalized solitons");
    add_grid(modulate, ma.grid);
    modulate->add_option("--input", ma.input, "Profile CSV");
    modulate->add_option("--zeta", ma.zeta, "Synthetic centers (comma separated)");
    modulate->add_option("--nu", ma.nu, "Synthetic nu values");
    modulate->add_option("--guess-zeta", ma.guess_zeta);
    modulate->add_option("--guess-nu", ma.guess_nu);

    ShootArgs sh;
    auto* shoot = app.add_subcommand("shoot", "Search for the multi-soliton initial parameters");
    add_grid(shoot, sh.grid);
    shoot->add_option("--k", sh.k)->capture_default_str();
    shoot->add_option("--s0", sh.s0)->capture_default_str();
    shoot->add_option("--target", sh.target)->capture_default_str();
    shoot->add_option("--c1", sh.c1, "Interaction constant (calibrated from the PDE when omitted)");
    shoot->add_option("--calib-horizon", sh.calib_horizon)->capture_default_str();
    shoot->add_option("--delta", sh.delta)->capture_default_str();
    shoot->add_option("--ds", sh.ds)->capture_default_str();
    shoot->add_option("--scheme", sh.scheme)->capture_default_str();
    shoot->add_option("--cadence", sh.cadence)->capture_default_str();
    shoot->add_option("--search", sh.search)->capture_default_str();
    shoot->add_option("--max-runs", sh.max_runs)->capture_default_str();
    shoot->add_option("--outer", sh.outer)->capture_default_str();
    shoot->add_option("--inner", sh.inner)->capture_default_str();
    shoot->add_flag("--resume", sh.resume, "Reuse runs recorded in the ledger");

    LorentzArgs la;
    auto* lor = app.add_subcommand("lorentz", "Lorentz transform utilities");
    add_grid(lor, la.grid);
    lor->add_option("--compose", la.compose, "Compose two boosts")->expected(2);
    lor->add_option("--boost", la.boost, "Boost the constant soliton and compare with kappa(d)");
    lor->add_option("--prescribe", la.prescribe, "zeta0_sharp zeta0_target")->expected(2);

    BlowupArgs ba;
    auto* blow = app.add_subcommand("blowupset", "Blow-up curve near a characteristic point");
    blow->add_option("--k", ba.k)->capture_default_str();
    blow->add_option("--p", ba.p)->capture_default_str();
    blow->add_option("--zeta0", ba.zeta0)->capture_default_str();
    blow->add_option("--gamma", ba.gamma)->capture_default_str();
    blow->add_option("--T0", ba.T0)->capture_default_str();
    blow->add_option("--x0", ba.x0)->capture_default_str();
    blow->add_option("--scan", ba.scan, "Offset range lo:hi")->capture_default_str();
    blow->add_option("--points", ba.points)->capture_default_str();

    PlanArgs pa;
    auto* plan = app.add_subcommand("plan", "Validate a multi-point configuration");
    plan->add_option("--input", pa.input, "JSON array of {x, T, k, zeta0}");
    plan->add_option("--p", pa.p)->capture_default_str();
    plan->add_option("--gamma", pa.gamma)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::config);
    }

    CLI::App* sub = app.get_subcommands().front();
    ctx.hash = io::config_hash(sub->get_name() + "\n" + sub->config_to_str(true, false));
    try {
        int rc = 0;
        const std::string name = sub->get_name();
        if (name == "centers") rc = cmd_centers(ca, ctx);
        else if (name == "spectrum") rc = cmd_spectrum(sa, ctx);
        else if (name == "evolve") rc = cmd_evolve(ea, ctx);
        else if (name == "modulate") rc = cmd_modulate(ma, ctx);
        else if (name == "shoot") rc = cmd_shoot(sh, ctx);
        else if (name == "lorentz") rc = cmd_lorentz(la, ctx);
        else if (name == "blowupset") rc = cmd_blowupset(ba, ctx);
        else if (name == "plan") rc = cmd_plan(pa, ctx);
        if (ctx.dry_run) {
            fmt::print("dry run: {} (config {})\n", name, ctx.hash);
            std::cout << sub->config_to_str(true, false);
            for (const auto& f : ctx.planned) fmt::print("would write {}\n", f);
        }
        return rc;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::numerical);
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"blowuplab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace blowuplab::cli

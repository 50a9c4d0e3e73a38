#include "blowuplab/similarity_pde.hpp"

#include <cmath>

#include <fmt/core.h>
#include <json.hpp>

#include "blowuplab/io.hpp"

namespace blowuplab::similarity {

Scheme parse_scheme(const std::string& name) {
    if (name == "imex-cn" || name == "cn") return Scheme::imex_cn;
    if (name == "imex-be" || name == "be") return Scheme::imex_be;
    throw ConfigError(fmt::format("unknown scheme '{}' (expected imex-cn or imex-be)", name));
}

std::string scheme_name(Scheme s) { return s == Scheme::imex_cn ? "imex-cn" : "imex-be"; }

void EvolveConfig::validate() const {
    if (!(ds > 0.0) || !std::isfinite(ds)) throw ConfigError(fmt::format("evolve.ds must be positive, got {}", ds));
}

DampingOperator DampingOperator::make(const profiles::Space& sp) {
    const int n = sp.n();
    const double p = sp.p(), a = sp.a();
    const auto& g = sp.grid();
    const Vec& W = sp.weights();
    auto wv = [a](double chi) { return 2.0 * std::sinh(chi) * std::pow(1.0 / std::cosh(chi), a + 1.0); };
    DampingOperator B;
    B.sub.assign(n, 0.0);
    B.sup.assign(n, 0.0);
    B.diag.resize(n);
    // Transport -2 y dy in skew form; the diagonal is the discrete divergence of the flux so that
    // constants are transported exactly.
    Vec v(n - 1);
    for (int j = 0; j + 1 < n; ++j) v[j] = wv(0.5 * (g.chi(j) + g.chi(j + 1)));
    for (int j = 0; j < n; ++j) B.diag[j] = -(p + 3.0) / (p - 1.0);
    for (int j = 0; j + 1 < n; ++j) {
        B.sup[j] = -v[j] / (2.0 * W[j]);
        B.sub[j + 1] = v[j] / (2.0 * W[j + 1]);
        B.diag[j] += v[j] / (2.0 * W[j]);
        B.diag[j + 1] -= v[j] / (2.0 * W[j + 1]);
    }
    // Outflow closure: w extrapolated as constant past both ends, so the end fluxes cancel.
    return B;
}

Vec DampingOperator::apply(const Vec& w) const {
    const std::size_t n = diag.size();
    Vec r(n);
    for (std::size_t j = 0; j < n; ++j) {
        double v = diag[j] * w[j];
        if (j > 0) v += sub[j] * w[j - 1];
        if (j + 1 < n) v += sup[j] * w[j + 1];
        r[j] = v;
    }
    return r;
}

Vec apply_L_centered(const profiles::Space& sp, const Vec& w) {
    const int n = sp.n();
    const double h = sp.h(), a = sp.a();
    Vec r(n, 0.0);
    for (int j = 1; j + 1 < n; ++j) {
        const double chi = sp.grid().chi(j);
        const double c = std::cosh(chi);
        const double d2 = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
        const double d1 = (w[j + 1] - w[j - 1]) / (2.0 * h);
        r[j] = c * c * (d2 - a * std::tanh(chi) * d1);
    }
    r[0] = r[1];
    r[n - 1] = r[n - 2];
    return r;
}

Vec nonlinearity(const profiles::Space& sp, const Vec& w) {
    const double e = sp.p() - 1.0;
    Vec r(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) r[j] = std::pow(std::abs(w[j]), e) * w[j];
    return r;
}

Stepper::Stepper(SpacePtr sp, double ds, Scheme scheme)
    : sp_(std::move(sp)), ds_(ds), scheme_(scheme), B_(DampingOperator::make(*sp_)) {
    if (!(ds > 0.0)) throw ConfigError(fmt::format("time step must be positive, got {}", ds));
    const int n = sp_->n();
    const double fb = scheme == Scheme::imex_cn ? ds / 2.0 : ds;
    const double fa = scheme == Scheme::imex_cn ? ds * ds / 4.0 : ds * ds;
    numerics::BandMatrix M(n, 1, 1);
    for (int j = 0; j < n; ++j) {
        M(j, j) = 1.0 - fb * B_.diag[j] - fa * (sp_->L_diag()[j] - sp_->c());
        if (j > 0) M(j, j - 1) = -fb * B_.sub[j] - fa * sp_->L_sub()[j];
        if (j + 1 < n) M(j, j + 1) = -fb * B_.sup[j] - fa * sp_->L_sup()[j];
    }
    lu_ = numerics::BandLU(M);
}

PhaseProfile Stepper::step(const PhaseProfile& q, double s) {
    const int n = sp_->n();
    const double ds = ds_, c = sp_->c();
    const Vec nn = nonlinearity(*sp_, q.w1);
    const Vec Lw1 = sp_->apply_L(q.w1);
    Vec rhs(n);
    PhaseProfile out = PhaseProfile::zero(sp_);
    if (scheme_ == Scheme::imex_cn) {
        const Vec Lw2 = sp_->apply_L(q.w2);
        const Vec Bw2 = B_.apply(q.w2);
        for (int j = 0; j < n; ++j) {
            const double ns = have_prev_ ? 1.5 * nn[j] - 0.5 * n_prev_[j] : nn[j];
            rhs[j] = q.w2[j] + 0.5 * ds * Bw2[j] + ds * (Lw1[j] - c * q.w1[j]) +
                     0.25 * ds * ds * (Lw2[j] - c * q.w2[j]) + ds * ns;
        }
        out.w2 = lu_.solve(rhs);
        for (int j = 0; j < n; ++j) out.w1[j] = q.w1[j] + 0.5 * ds * (q.w2[j] + out.w2[j]);
    } else {
        for (int j = 0; j < n; ++j) rhs[j] = q.w2[j] + ds * (Lw1[j] - c * q.w1[j]) + ds * nn[j];
        out.w2 = lu_.solve(rhs);
        for (int j = 0; j < n; ++j) out.w1[j] = q.w1[j] + ds * out.w2[j];
    }
    n_prev_ = nn;
    have_prev_ = true;
    if (!out.finite()) throw NumericalError(fmt::format("non-finite state after the step from s = {}", s));
    return out;
}

PhaseProfile step(const PhaseProfile& q, const EvolveConfig& cfg, double s) {
    cfg.validate();
    Stepper st(q.space, cfg.ds, cfg.scheme);
    return st.step(q, s);
}

EvolveResult evolve(const PhaseProfile& q0, double s0, double s1, const EvolveConfig& cfg,
                    const EvolveCallbacks& cb) {
    cfg.validate();
    if (!(s1 > s0)) throw ConfigError(fmt::format("evolve: need s1 > s0, got [{}, {}]", s0, s1));
    if (!q0.finite()) throw NumericalError(fmt::format("evolve: non-finite initial state at s = {}", s0));
    const long nsteps = std::max(1L, static_cast<long>(std::ceil((s1 - s0) / cfg.ds - 1e-9)));
    const double ds = (s1 - s0) / static_cast<double>(nsteps);
    const long every = std::max(1L, std::lround(cb.cadence / ds));
    Stepper st(q0.space, ds, cfg.scheme);
    EvolveResult res;
    PhaseProfile q = q0;
    long sample_index = 0;
    auto sample = [&](double s) {
        if (cfg.monitor_energy) {
            res.energy_s.push_back(s);
            res.energy.push_back(profiles::energy(q));
        }
        if (cfg.monitor_norms) {
            res.norm_s.push_back(s);
            res.norm.push_back(profiles::h_norm(q));
        }
        if (cb.keep_every > 0 && sample_index % cb.keep_every == 0) {
            res.s.push_back(s);
            res.slices.push_back(q);
        }
        ++sample_index;
        return cb.on_sample ? cb.on_sample(s, q) : true;
    };
    double s = s0;
    if (!sample(s)) {
        res.final_state = q;
        res.s_end = s;
        res.stopped_early = true;
        return res;
    }
    for (long i = 1; i <= nsteps; ++i) {
        try {
            q = st.step(q, s);
        } catch (const NumericalError&) {
            if (!cb.checkpoint_path.empty()) write_checkpoint(cb.checkpoint_path, q, s, ds, cb.config_hash);
            throw;
        }
        s = s0 + static_cast<double>(i) * ds;
        if (i % every == 0 || i == nsteps) {
            if (!sample(s)) {
                res.stopped_early = i < nsteps;
                break;
            }
        }
    }
    res.final_state = q;
    res.s_end = s;
    return res;
}

Vec energy_series(const std::vector<PhaseProfile>& slices) {
    if (slices.empty()) throw ConfigError("energy_series: empty trajectory");
    Vec e;
    e.reserve(slices.size());
    for (const auto& q : slices) e.push_back(profiles::energy(q));
    return e;
}

double max_energy_increase_rate(const Vec& s, const Vec& e) {
    double worst = 0.0;
    for (std::size_t i = 1; i < e.size(); ++i) {
        const double dt = s[i] - s[i - 1];
        if (dt > 0.0) worst = std::max(worst, (e[i] - e[i - 1]) / dt);
    }
    return worst;
}

double pde_residual(const PhaseProfile& prev, const PhaseProfile& cur, const PhaseProfile& next, double ds) {
    const auto& sp = *cur.space;
    const auto B = DampingOperator::make(sp);
    const Vec Lw = sp.apply_L(cur.w1);
    const Vec Bw = B.apply(cur.w2);
    const Vec nn = nonlinearity(sp, cur.w1);
    const Vec& W = sp.weights();
    double acc = 0.0;
    for (int j = 0; j < sp.n(); ++j) {
        const double r1 = (next.w1[j] - prev.w1[j]) / (2.0 * ds) - cur.w2[j];
        const double r2 = (next.w2[j] - prev.w2[j]) / (2.0 * ds) - (Lw[j] - sp.c() * cur.w1[j] + nn[j] + Bw[j]);
        acc += W[j] * (r1 * r1 + r2 * r2);
    }
    return std::sqrt(acc);
}

void write_checkpoint(const std::string& path, const PhaseProfile& q, double s, double ds, const std::string& hash) {
    io::write_atomic(path, io::profile_csv(q, hash));
    nlohmann::ordered_json side;
    side["s"] = s;
    side["ds"] = ds;
    side["config_hash"] = hash;
    side["version"] = io::version();
    side["p"] = q.space->p();
    side["n"] = q.space->n();
    side["chi_max"] = q.space->grid().chi_max;
    io::write_atomic(path + ".json", side.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::string& path, const SpacePtr& sp) {
    Checkpoint c;
    c.state = io::parse_profile_csv(io::read_file(path), sp);
    const auto side = nlohmann::json::parse(io::read_file(path + ".json"));
    c.s = side.at("s").get<double>();
    c.ds = side.at("ds").get<double>();
    c.hash = side.at("config_hash").get<std::string>();
    if (side.at("p").get<double>() != sp->p() || side.at("n").get<int>() != sp->n())
        throw ConfigError(fmt::format("checkpoint {} was written for a different grid or exponent", path));
    return c;
}

}  // namespace blowuplab::similarity

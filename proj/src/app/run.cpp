#include "rotor/app/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <omp.h>
#include <openssl/evp.h>

#include "rotor/ensemble.hpp"
#include "rotor/observables.hpp"
#include "rotor/quantum/master.hpp"
#include "rotor/quantum/mcwf.hpp"

#ifndef ROTOR_VERSION
#define ROTOR_VERSION "0.0.0"
#endif
#ifndef ROTOR_GIT_REVISION
#define ROTOR_GIT_REVISION "unknown"
#endif

namespace rotor::app {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string code_version() { return std::string(ROTOR_VERSION) + "+" + ROTOR_GIT_REVISION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class QuotaExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

using Row = std::vector<double>;

struct Table {
    std::string file;
    std::string content; ///< one-line description for the metadata block
    std::vector<std::string> meta;
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

/// Shared state of one run.
struct Context {
    const ExperimentSpec& spec;
    const RunOptions& opt;
    fs::path dir;
    std::vector<std::string> files;
    json manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    void log(const std::string& msg) const {
        if (!opt.quiet) std::fprintf(stderr, "[%s %7.1fs] %s\n", spec.name.c_str(), elapsed(), msg.c_str());
    }

    void write(const Table& t) {
        std::string out;
        out += fmt::format("# experiment: {}\n# kind: {}\n# code_version: {}\n# content: {}\n",
                           spec.name, to_string(spec.kind), code_version(), t.content);
        for (const auto& m : t.meta) out += "# " + m + "\n";
        out += "# config:\n";
        std::istringstream cfg(render_config(spec));
        for (std::string line; std::getline(cfg, line);) out += "#   " + line + "\n";
        for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
        out += "\n";
        for (const Row& r : t.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += fmt::format("{:.17g}", r[i]);
            }
            out += "\n";
        }
        write_file(t.file, out);
    }

    void write_file(const std::string& name, const std::string& data) {
        std::ofstream f(dir / name, std::ios::binary);
        f << data;
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        files.push_back(name);
    }
};

std::vector<double> output_times(const ScheduleConfig& s) {
    std::vector<double> t(s.outputs + 1);
    for (std::size_t i = 0; i <= s.outputs; ++i)
        t[i] = s.t_max * static_cast<double>(i) / static_cast<double>(s.outputs);
    return t;
}

// ---------------------------------------------------------------------------
// classical

struct ClassicalPlan {
    double dt;
    std::uint64_t stride;
    int halvings;
    double bias;
};

/// Step size: calibrated (optional), then shortened so that a whole number
/// of steps fits each output interval.
ClassicalPlan plan_classical(const EngineParams& p, classical::Scheme scheme, double dt_start,
                             bool calibrate, const ScheduleConfig& sched) {
    const auto profile = ModulationProfile::standard();
    classical::Calibration cal{std::min(dt_start, classical::max_stable_dt(p)), 0, kNaN};
    if (calibrate) cal = classical::calibrate_dt(p, profile, scheme, dt_start);
    const double interval = sched.t_max / static_cast<double>(sched.outputs);
    const auto stride =
        static_cast<std::uint64_t>(std::ceil(interval / cal.dt * (1.0 - 1e-12)));
    return {interval / static_cast<double>(std::max<std::uint64_t>(stride, 1)),
            std::max<std::uint64_t>(stride, 1), cal.halvings, cal.relative_bias};
}

const std::vector<std::string> kClassicalColumns = {
    "t",      "mean_lz", "var_lz", "mean_phi", "var_phi",       "mean_cos",       "mean_sin",
    "mean_cos2", "mean_sin2", "mean_n", "var_n", "P_W",       "P_H",            "P_C",
    "efficiency_2g", "lz_over_Ikappa", "rate_lz", "rate_var_lz"};

std::vector<Row> classical_rows(const classical::EnsembleSummary& ens, const EngineParams& p,
                                double interval, std::size_t window) {
    std::vector<double> lz, var;
    for (const auto& r : ens.records) {
        lz.push_back(r.mean_lz);
        var.push_back(r.var_lz);
    }
    const auto w = std::min<std::size_t>(window, lz.size() % 2 ? lz.size() : lz.size() - 1);
    std::vector<double> dlz(lz.size(), kNaN), dvar(lz.size(), kNaN);
    if (lz.size() >= 3) {
        dlz = obs::smoothed_derivative(lz, interval, w);
        dvar = obs::smoothed_derivative(var, interval, w);
    }
    std::vector<Row> rows;
    for (std::size_t i = 0; i < ens.records.size(); ++i) {
        const auto& r = ens.records[i];
        const double pw = obs::work_power(r, p), ph = obs::heat_power(r, p);
        const auto eta = obs::efficiency(pw, ph);
        rows.push_back({r.t, r.mean_lz, r.var_lz, r.mean_phi, r.var_phi, r.mean_cos, r.mean_sin,
                        r.mean_cos2, r.mean_sin2, r.mean_n, r.var_n, pw, ph, obs::cold_power(r, p),
                        eta ? *eta * p.omega0 / 2.0 : kNaN, r.mean_lz / (p.inertia * p.kappa),
                        dlz[i], dvar[i]});
    }
    return rows;
}

void check_storage_quota(std::size_t trajectories, std::size_t kept, std::size_t snapshots,
                         double quota_gb) {
    const double bytes = 8.0 * static_cast<double>(trajectories) *
                         (static_cast<double>(kept) + 2.0 * static_cast<double>(snapshots));
    if (bytes > quota_gb * 1e9)
        throw QuotaExceeded(fmt::format(
            "stored trajectories need {:.2f} GB (quota {:.2f} GB); raise outputs.correlation_every "
            "or lower ensemble.trajectories",
            bytes / 1e9, quota_gb));
}

struct ClassicalRun {
    classical::EnsembleSummary summary;
    ClassicalPlan plan;
};

ClassicalRun classical_ensemble(Context& ctx, const EngineParams& p, const classical::InitSpec& init,
                                classical::Scheme scheme, double dt, bool calibrate,
                                classical::NoiseModel noise, std::size_t n, std::uint64_t seed,
                                std::size_t keep_every, const std::vector<double>& snapshots) {
    const ScheduleConfig& sched = ctx.spec.schedule;
    ClassicalRun run;
    run.plan = plan_classical(p, scheme, dt, calibrate, sched);
    classical::EnsembleConfig c;
    c.params = p;
    c.init = init;
    c.integ = {scheme, noise, run.plan.dt};
    c.t_max = sched.t_max;
    c.output_stride = run.plan.stride;
    c.trajectories = n;
    c.base_seed = seed;
    c.keep_every = keep_every;
    c.snapshot_times = snapshots;
    const std::size_t kept = keep_every ? sched.outputs / keep_every + 1 : 0;
    check_storage_quota(n, kept, snapshots.size(), ctx.opt.memory_quota_gb);
    ctx.log(fmt::format("classical ensemble: {} trajectories, dt {:.6g}, {} steps/output, {}",
                        n, run.plan.dt, run.plan.stride,
                        noise == classical::NoiseModel::backaction ? "with backaction" : "backaction-free"));
    run.summary = classical::run_ensemble(c);
    return run;
}

std::vector<std::string> classical_meta(const ClassicalRun& r, classical::Scheme scheme,
                                        classical::NoiseModel noise, std::uint64_t seed) {
    return {fmt::format("scheme: {}", scheme == classical::Scheme::milstein ? "milstein" : "euler"),
            fmt::format("noise: {}", noise == classical::NoiseModel::backaction ? "backaction"
                                                                                : "backaction-free"),
            fmt::format("dt: {:.17g}", r.plan.dt), fmt::format("output_stride: {}", r.plan.stride),
            fmt::format("dt_halvings: {}", r.plan.halvings),
            fmt::format("trajectories_used: {}", r.summary.count),
            fmt::format("excluded: {}", r.summary.excluded.size()),
            fmt::format("base_seed: {}", seed),
            "seed_rule: trajectory i uses splitmix64 mix of (base_seed, i)"};
}

Table correlation_table(const std::string& file, const std::vector<double>& times,
                        const std::function<double(std::size_t, std::size_t)>& at,
                        std::vector<std::string> meta) {
    Table t{file, "two-time angle correlation S(t1, t2); NaN where 1 - R[2 phi] <= 1e-9",
            std::move(meta), {"t1", "t2", "S"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < times.size(); ++j) t.rows.push_back({times[i], times[j], at(i, j)});
    return t;
}

void write_classical_outputs(Context& ctx, const ClassicalRun& run, const std::string& prefix,
                             const std::vector<std::string>& meta, const EngineParams& p) {
    const ExperimentSpec& s = ctx.spec;
    const double interval = s.schedule.t_max / static_cast<double>(s.schedule.outputs);
    ctx.write({prefix + ".csv", "ensemble moments, powers and rates per output time", meta,
               kClassicalColumns, classical_rows(run.summary, p, interval, s.outputs.rate_window)});
    if (!run.summary.kept_times.empty()) {
        const auto grid = obs::correlation_grid(run.summary);
        ctx.write(correlation_table(prefix + "_correlation.csv", grid.times,
                                    [&](std::size_t i, std::size_t j) { return grid.at(i, j); },
                                    meta));
    }
}

int run_classical(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    const auto noise = s.kind == Kind::classical_backaction ? classical::NoiseModel::backaction
                                                            : classical::NoiseModel::backaction_free;
    const std::uint64_t seed = ctx.opt.seed.value_or(s.ensemble.base_seed);
    classical::InitSpec init{s.init.deterministic, s.init.k, s.init.mu, s.init.intensity};
    const ClassicalRun run =
        classical_ensemble(ctx, s.engine, init, s.integrator.scheme, *s.integrator.dt,
                           s.integrator.calibrate, noise, s.ensemble.trajectories, seed,
                           s.outputs.correlation_every, s.outputs.pv_times);
    const auto meta = classical_meta(run, s.integrator.scheme, noise, seed);
    write_classical_outputs(ctx, run, "observables", meta, s.engine);

    json pv_summary = json::array();
    for (const auto& snap : run.summary.snapshots) {
        const auto pv = obs::pv_accumulate(snap.phi, snap.n, s.engine, s.outputs.pv_bins);
        double work = kNaN;
        try {
            work = obs::cycle_work(pv);
        } catch (const std::domain_error&) {
        }
        const double wcyc = work_per_cycle(s.engine);
        const std::string file = fmt::format("pv_t{:g}.csv", snap.t);
        Table t{file, "PV diagram: mean intensity (pressure) per angle bin against x = -cos(phi)",
                meta, {"bin", "phi", "x", "p", "count", "ideal"}, {}};
        t.meta.push_back(fmt::format("time: {:.17g}", snap.t));
        t.meta.push_back(fmt::format("cycle_work: {:.17g}", work));
        t.meta.push_back(fmt::format("work_fraction: {:.17g}", work / wcyc));
        for (std::size_t b = 0; b < pv.bins(); ++b)
            t.rows.push_back({static_cast<double>(b), pv.phi_center[b], pv.volume[b], pv.pressure[b],
                              static_cast<double>(pv.count[b]), pv.ideal[b]});
        ctx.write(t);
        pv_summary.push_back({{"time", snap.t},
                              {"file", file},
                              {"cycle_work", work},
                              {"work_per_cycle_ideal", wcyc},
                              {"work_fraction", work / wcyc},
                              {"empty_bins", pv.empty_bins()}});
    }
    ctx.manifest["classical"] = {{"dt", run.plan.dt},
                                 {"output_stride", run.plan.stride},
                                 {"dt_halvings", run.plan.halvings},
                                 {"trajectories_used", run.summary.count},
                                 {"excluded", run.summary.excluded.size()},
                                 {"pv", pv_summary}};
    ctx.manifest["seeds"] = {{"base_seed", seed}};
    return exit_ok;
}

/// Classical ensembles matched to a quantum experiment.
void run_reference(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    if (s.reference.trajectories == 0) return;
    const std::uint64_t seed = ctx.opt.seed.value_or(s.reference.base_seed);
    const classical::InitSpec init{false, s.init.k, s.init.mu, classical::IntensityInit::zero};
    const double dt = s.reference.dt.value_or(classical::max_stable_dt(s.engine));
    json info = json::array();
    for (auto noise : {classical::NoiseModel::backaction_free, classical::NoiseModel::backaction}) {
        const bool ba = noise == classical::NoiseModel::backaction;
        if (ba ? !s.reference.backaction : !s.reference.backaction_free) continue;
        const ClassicalRun run = classical_ensemble(ctx, s.engine, init, s.reference.scheme, dt,
                                                    s.integrator.calibrate, noise,
                                                    s.reference.trajectories, seed,
                                                    s.outputs.correlation_every, {});
        const std::string prefix = ba ? "classical_backaction" : "classical_backaction_free";
        write_classical_outputs(ctx, run, prefix, classical_meta(run, s.reference.scheme, noise, seed),
                                s.engine);
        info.push_back({{"file", prefix + ".csv"},
                        {"dt", run.plan.dt},
                        {"trajectories_used", run.summary.count},
                        {"excluded", run.summary.excluded.size()}});
    }
    ctx.manifest["classical_reference"] = info;
    ctx.manifest["seeds"]["reference_base_seed"] = seed;
}

// ---------------------------------------------------------------------------
// quantum

quantum::QuantumSpace quantum_space(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    quantum::SpaceRequest req;
    req.k = s.init.k;
    req.t_max = s.schedule.t_max;
    req.n_max = s.space.n_max;
    req.m_min = s.space.m_min;
    req.m_max = s.space.m_max;
    req.spread_sigmas = s.space.spread_sigmas;
    req.max_rows = s.space.max_rows;
    req.memory_budget_bytes = s.space.memory_gb * 1e9;
    const quantum::QuantumSpace space = quantum::build_space(s.engine, req);
    ctx.manifest["space"] = {{"m_min", space.m_min},
                             {"m_max", space.m_max},
                             {"n_max", space.n_max},
                             {"dimension", space.dim()},
                             {"ordering", "Fock-level blocks of momentum rows, m ascending"}};
    ctx.log(fmt::format("quantum space m in [{}, {}], n <= {}, dimension {}", space.m_min,
                        space.m_max, space.n_max, space.dim()));
    return space;
}

std::vector<std::string> space_meta(const quantum::QuantumSpace& sp) {
    return {fmt::format("space: m_min {} m_max {} n_max {} dimension {}", sp.m_min, sp.m_max,
                        sp.n_max, sp.dim())};
}

const std::vector<std::string> kQuantumExtra = {
    "P_B",      "first_law_residual", "P_H_closed", "P_C_closed", "S",
    "dS_dt",    "S_int_rate",         "S_rotor",    "S_mode",     "purity",
    "trace",    "hermiticity",        "min_eigenvalue", "boundary_low", "boundary_high",
    "top_fock", "angle_raw_min"};

std::vector<Row> quantum_rows(const std::vector<quantum::QRecord>& recs, const EngineParams& p,
                              double interval, std::size_t window) {
    std::vector<double> lz, var;
    for (const auto& r : recs) {
        lz.push_back(r.mean_lz);
        var.push_back(r.var_lz);
    }
    std::vector<double> dlz(lz.size(), kNaN), dvar(lz.size(), kNaN);
    if (lz.size() >= 3) {
        const auto w = std::min<std::size_t>(window, lz.size() % 2 ? lz.size() : lz.size() - 1);
        dlz = obs::smoothed_derivative(lz, interval, w);
        dvar = obs::smoothed_derivative(var, interval, w);
    }
    std::vector<Row> rows;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        const auto& q = r.powers;
        const auto eta = obs::efficiency(q.work, q.hot);
        const auto& e = r.entropy;
        const auto& tr = r.truncation;
        rows.push_back({r.t,          r.mean_lz,   r.var_lz,     kNaN,         kNaN,
                        r.mean_cos,   r.mean_sin,  r.mean_cos2,  r.mean_sin2,  r.mean_n,
                        r.var_n,      q.work,      q.hot,        q.cold,
                        eta ? *eta * p.omega0 / 2.0 : kNaN,      r.mean_lz / (p.inertia * p.kappa),
                        dlz[i],       dvar[i],     q.backaction, q.residual,   q.hot_closed,
                        q.cold_closed, e.s,        e.ds_dt,      e.s_int_rate, e.s_rotor,
                        e.s_mode,     e.purity,    r.trace,      r.hermiticity, e.min_eigenvalue,
                        tr.low,       tr.high,     tr.top_fock,  r.angle_raw_min});
    }
    return rows;
}

json truncation_json(const std::vector<quantum::QRecord>& recs, const quantum::QuantumSpace& sp) {
    double low = 0, high = 0, top = 0;
    json offending = json::array();
    const double thr = quantum::TruncationReport{}.threshold;
    for (const auto& r : recs) {
        const auto& t = r.truncation;
        low = std::max(low, t.low);
        high = std::max(high, t.high);
        top = std::max(top, t.top_fock);
        if (!t.pass() && offending.size() < 20) {
            json o = {{"t", r.t}};
            if (t.low >= thr) o["momentum_rows"] = fmt::format("m = {}..{}: {:.3e}", sp.m_min, sp.m_min + 2, t.low);
            if (t.high >= thr) o["momentum_rows_high"] = fmt::format("m = {}..{}: {:.3e}", sp.m_max - 2, sp.m_max, t.high);
            if (t.top_fock >= thr) o["fock_level"] = fmt::format("n = {}: {:.3e}", sp.n_max, t.top_fock);
            offending.push_back(o);
        }
    }
    return {{"threshold", thr},
            {"max_boundary_low", low},
            {"max_boundary_high", high},
            {"max_top_fock", top},
            {"pass", low < thr && high < thr && top < thr},
            {"offending", offending}};
}

json sanity_json(const std::vector<quantum::QRecord>& recs, double tol) {
    double trace = 0, min_ev = std::numeric_limits<double>::infinity(), resid = 0;
    double pb = std::numeric_limits<double>::infinity();
    for (const auto& r : recs) {
        trace = std::max(trace, std::abs(r.trace - 1.0));
        min_ev = std::min(min_ev, r.entropy.min_eigenvalue);
        resid = std::max(resid, std::abs(r.powers.residual));
        pb = std::min(pb, r.powers.backaction);
    }
    return {{"max_trace_error", trace},
            {"min_eigenvalue", min_ev},
            {"max_first_law_residual", resid},
            {"min_backaction_power", pb},
            {"pass", trace < 1e-8 && min_ev > -1e-8 && resid < 10 * tol && pb >= 0.0}};
}

int run_master(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    const quantum::QuantumSpace space = quantum_space(ctx);
    const quantum::Liouvillian lv(space, s.engine);
    const std::vector<double> times = output_times(s.schedule);
    const double tol = *s.integrator.tol;
    const double interval = s.schedule.t_max / static_cast<double>(s.schedule.outputs);

    quantum::MasterOptions mo;
    mo.tol = tol;
    mo.angle_points = s.outputs.angle_points;
    if (s.outputs.correlation_every > 0)
        for (std::size_t i = 0; i < times.size(); i += s.outputs.correlation_every)
            mo.checkpoint_times.push_back(times[i]);
    std::vector<quantum::QRecord> recs;
    const std::size_t every = std::max<std::size_t>(1, s.schedule.outputs / 10);
    mo.on_record = [&](const quantum::QRecord& r) {
        recs.push_back(r);
        if ((recs.size() - 1) % every == 0)
            ctx.log(fmt::format("t = {:.4g} of {:.4g}, <L_z> = {:.5g}", r.t, s.schedule.t_max, r.mean_lz));
    };
    auto meta = space_meta(space);
    meta.push_back(fmt::format("tol: {:.17g}", tol));
    meta.push_back("integrator: Dormand-Prince 5(4), rho re-Hermitized after each step");
    auto columns = kClassicalColumns;
    columns.insert(columns.end(), kQuantumExtra.begin(), kQuantumExtra.end());
    auto write_series = [&](bool partial) {
        auto m = meta;
        if (partial) m.push_back("partial: true");
        ctx.write({"observables.csv", "quantum expectation values, powers, entropy and truncation per output time",
                   m, columns, quantum_rows(recs, s.engine, interval, s.outputs.rate_window)});
    };

    quantum::MasterResult res;
    try {
        res = quantum::evolve_master(lv, quantum::von_mises_state(space, s.init.k, s.init.mu), times, mo);
    } catch (...) {
        if (!recs.empty()) {
            write_series(true);
            ctx.manifest["partial"] = true;
            ctx.manifest["truncation"] = truncation_json(recs, space);
        }
        throw;
    }
    write_series(false);
    ctx.manifest["integrator"] = {{"steps", res.steps}, {"attempts", res.attempts}};
    if (!res.angles.empty()) {
        Table t{"angles.csv", "angle distribution p(phi) from the truncated Fourier series, clipped at 0",
                meta, {"t", "phi", "p"}, {}};
        for (std::size_t i = 0; i < res.angles.size(); ++i)
            for (std::size_t k = 0; k < res.angles[i].phi.size(); ++k)
                t.rows.push_back({recs[i].t, res.angles[i].phi[k], res.angles[i].density[k]});
        ctx.write(t);
    }
    if (!res.checkpoints.empty()) {
        if (s.outputs.checkpoint_files) {
            for (std::size_t i = 0; i < res.checkpoints.size(); ++i) {
                const std::string name = fmt::format("checkpoint_{:03d}.bin", i);
                quantum::write_checkpoint((ctx.dir / name).string(), space, res.checkpoints[i]);
                ctx.files.push_back(name);
            }
        }
        ctx.log(fmt::format("regression grid over {} checkpoints", res.checkpoints.size()));
        const auto grid = quantum::q_correlation_grid(lv, res.checkpoints, tol);
        std::vector<double> ct;
        for (const auto& c : res.checkpoints) ct.push_back(c.t);
        auto m = meta;
        m.push_back("symmetrization: C = (1/2)<{e^{i phi}(t1), e^{-+i phi}(t2)}> via quantum regression");
        ctx.write(correlation_table("correlation.csv", ct,
                                    [&](std::size_t i, std::size_t j) { return grid[i][j]; }, m));
    }
    ctx.manifest["truncation"] = truncation_json(recs, space);
    ctx.manifest["sanity"] = sanity_json(recs, tol);
    run_reference(ctx);
    return ctx.manifest["truncation"]["pass"].get<bool>() ? exit_ok : exit_truncation;
}

int run_mcwf(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    const quantum::QuantumSpace space = quantum_space(ctx);
    const quantum::Liouvillian lv(space, s.engine);
    const std::vector<double> times = output_times(s.schedule);
    const std::uint64_t seed = ctx.opt.seed.value_or(s.ensemble.base_seed);
    const quantum::Vector psi = quantum::von_mises_coefficients(space.m_min, space.m_max, s.init.k, s.init.mu);
    ctx.log(fmt::format("MCWF: {} trajectories", s.ensemble.trajectories));
    const auto e = quantum::mcwf_ensemble(lv, psi, 0, times, s.ensemble.trajectories, seed,
                                          {.tol = *s.integrator.tol});
    auto meta = space_meta(space);
    meta.push_back(fmt::format("tol: {:.17g}", *s.integrator.tol));
    meta.push_back(fmt::format("base_seed: {}", seed));
    meta.push_back(fmt::format("jumps: {}", e.jumps));
    Table t{"observables.csv", "MCWF ensemble means with standard errors per output time", meta,
            {"t", "mean_lz", "se_lz", "var_lz", "mean_n", "se_n", "P_W", "se_P_W"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i)
        t.rows.push_back({times[i], e.lz[i].mean, e.lz[i].se, e.lz2[i].mean - e.lz[i].mean * e.lz[i].mean,
                          e.n[i].mean, e.n[i].se, e.work[i].mean, e.work[i].se});
    ctx.write(t);
    ctx.manifest["seeds"] = {{"base_seed", seed}};
    ctx.manifest["mcwf"] = {{"trajectories", e.trajectories}, {"jumps", e.jumps}};
    run_reference(ctx);
    return exit_ok;
}

int run_analytic(Context& ctx) {
    const ExperimentSpec& s = ctx.spec;
    const EngineParams& p = s.engine;
    Table t{"analytic.csv",
            "free-rotation predictions against <L_z>/(I kappa); saturated = 1 where x >= 0.1",
            {},
            {"lz_over_Ikappa", "mean_lz", "rate_lz", "rate_var_lz", "P_W", "P_H", "efficiency_2g",
             "carnot_floor_2g", "saturated"},
            {}};
    const double floor2g = carnot_floor(p) * p.omega0 / 2.0;
    for (std::size_t i = 0; i < s.analytic.points; ++i) {
        const double x = s.analytic.x_min + (s.analytic.x_max - s.analytic.x_min) *
                                                static_cast<double>(i) /
                                                static_cast<double>(s.analytic.points - 1);
        const double lz = x * p.inertia * p.kappa;
        t.rows.push_back({x, lz, fr_momentum_rate(p), fr_variance_rate(p), fr_output_power(p, lz),
                          fr_input_power(p), fr_efficiency(p, lz).in_carnot_units, floor2g,
                          x >= 0.1 ? 1.0 : 0.0});
    }
    ctx.write(t);
    return exit_ok;
}

} // namespace

RunReport run_experiment(const ExperimentSpec& spec, const RunOptions& opt) {
    RunReport rep;
    if (const auto errs = validate(spec); !errs.empty()) {
        rep.exit_code = exit_config;
        rep.status = "config";
        rep.message = ConfigError(errs).what();
        return rep;
    }
    if (opt.workers > 0) omp_set_num_threads(opt.workers);
    Context ctx{spec, opt, opt.out_root / spec.output_directory(), {}, json::object()};
    fs::create_directories(ctx.dir);
    rep.directory = ctx.dir;
    ctx.manifest["name"] = spec.name;
    ctx.manifest["kind"] = to_string(spec.kind);
    ctx.manifest["code_version"] = code_version();
    ctx.manifest["config"] = render_config(spec);
    if (opt.seed) ctx.manifest["seed_override"] = *opt.seed;
    ctx.manifest["partial"] = false;
    ctx.log(fmt::format("{} -> {}", to_string(spec.kind), ctx.dir.string()));

    try {
        switch (spec.kind) {
        case Kind::classical:
        case Kind::classical_backaction: rep.exit_code = run_classical(ctx); break;
        case Kind::quantum_master: rep.exit_code = run_master(ctx); break;
        case Kind::quantum_mcwf: rep.exit_code = run_mcwf(ctx); break;
        case Kind::analytic: rep.exit_code = run_analytic(ctx); break;
        }
        if (rep.exit_code == exit_truncation) rep.message = "truncation check failed, see manifest.json";
    } catch (const quantum::SpaceTooLarge& e) {
        rep.exit_code = exit_quota;
        rep.message = e.what();
    } catch (const quantum::WindowTooSmall& e) {
        rep.exit_code = exit_truncation;
        rep.message = e.what();
        ctx.manifest["truncation"] = {{"pass", false},
                                      {"offending", json::array({{{"t", 0.0},
                                                                  {"initial_state", e.what()}}})}};
    } catch (const QuotaExceeded& e) {
        rep.exit_code = exit_quota;
        rep.message = e.what();
    } catch (const classical::DivergenceError& e) {
        rep.exit_code = exit_divergence;
        rep.message = e.what();
    } catch (const classical::EnsembleDiverged& e) {
        rep.exit_code = exit_divergence;
        rep.message = e.what();
    } catch (const quantum::TraceDrift& e) {
        rep.exit_code = exit_divergence;
        rep.message = e.what();
    } catch (const quantum::StepUnderflow& e) {
        rep.exit_code = exit_divergence;
        rep.message = e.what();
    } catch (const std::exception& e) {
        rep.exit_code = exit_failure;
        rep.message = e.what();
    }
    static const char* names[] = {"ok", "config", "truncation", "divergence", "quota", "failure"};
    rep.status = names[rep.exit_code];
    if (rep.exit_code != exit_ok && !ctx.files.empty() && rep.exit_code != exit_truncation)
        ctx.manifest["partial"] = true;

    ctx.manifest["status"] = rep.status;
    ctx.manifest["exit_code"] = rep.exit_code;
    ctx.manifest["message"] = rep.message;
    ctx.manifest["threads"] = omp_get_max_threads();
    ctx.manifest["wall_time_s"] = ctx.elapsed();
    json files = json::array();
    for (const auto& f : ctx.files)
        files.push_back({{"name", f},
                         {"bytes", fs::file_size(ctx.dir / f)},
                         {"sha256", sha256_file(ctx.dir / f)}});
    ctx.manifest["files"] = files;
    rep.files = ctx.files;
    {
        std::ofstream m(ctx.dir / "manifest.json");
        m << ctx.manifest.dump(2) << "\n";
    }
    rep.files.push_back("manifest.json");
    ctx.log(fmt::format("{}{}", rep.status, rep.message.empty() ? "" : ": " + rep.message));
    return rep;
}

} // namespace rotor::app

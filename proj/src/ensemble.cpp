#include "rotor/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rotor::classical {

namespace {

// Raw per-sample terms averaged into MomentRecord (besides the Welford trio).
enum Term : std::size_t {
    kCos,
    kSin,
    kCos2,
    kSin2,
    kNSin,
    kNSinLz,
    kHotDeficit,
    kHotDeficitCos,
    kColdDeficit,
    kColdDeficitCos,
    kSinNbar,
    kSinNbarLz,
    kSin2Nbar2Rate,
    kTermCount
};

using Terms = std::array<double, kTermCount>;

Terms sample_terms(const ClassicalState& s, const EngineParams& p,
                   const ModulationProfile& profile) {
    const double sn = std::sin(s.phi);
    const double cs = std::cos(s.phi);
    const auto [fh, fc] = profile.weights(s.phi);
    const auto bath = local_bath(s.phi, p, profile);
    const double h2 = fh * fh;
    const double c2 = fc * fc;
    Terms t{};
    t[kCos] = cs;
    t[kSin] = sn;
    t[kCos2] = cs * cs - sn * sn;
    t[kSin2] = 2.0 * sn * cs;
    t[kNSin] = s.n * sn;
    t[kNSinLz] = s.n * sn * s.lz;
    t[kHotDeficit] = h2 * (p.n_hot - s.n);
    t[kHotDeficitCos] = h2 * cs * (p.n_hot - s.n);
    t[kColdDeficit] = c2 * (p.n_cold - s.n);
    t[kColdDeficitCos] = c2 * cs * (p.n_cold - s.n);
    t[kSinNbar] = sn * bath.occupation;
    t[kSinNbarLz] = sn * bath.occupation * s.lz;
    t[kSin2Nbar2Rate] = sn * sn * bath.occupation * bath.occupation / bath.rate;
    return t;
}

struct Welford {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }

    void merge(const Welford& o) {
        if (o.count == 0.0) return;
        if (count == 0.0) {
            *this = o;
            return;
        }
        const double total = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * (o.count / total);
        m2 += o.m2 + delta * delta * (count * o.count / total);
        count = total;
    }
};

struct TimeAccumulator {
    Welford lz, phi, n;
    Terms sums{};

    void add(const ClassicalState& s, const Terms& t) {
        lz.add(s.lz);
        phi.add(s.phi);
        n.add(s.n);
        for (std::size_t k = 0; k < kTermCount; ++k) sums[k] += t[k];
    }

    void merge(const TimeAccumulator& o) {
        lz.merge(o.lz);
        phi.merge(o.phi);
        n.merge(o.n);
        for (std::size_t k = 0; k < kTermCount; ++k) sums[k] += o.sums[k];
    }
};

MomentRecord finish(double t, const TimeAccumulator& acc) {
    MomentRecord r;
    r.t = t;
    const double count = acc.lz.count;
    if (count == 0.0) return r;
    const auto avg = [&](Term k) { return acc.sums[k] / count; };
    r.mean_lz = acc.lz.mean;
    r.var_lz = acc.lz.m2 / count;
    r.mean_phi = acc.phi.mean;
    r.var_phi = acc.phi.m2 / count;
    r.mean_n = acc.n.mean;
    r.var_n = acc.n.m2 / count;
    r.mean_cos = avg(kCos);
    r.mean_sin = avg(kSin);
    r.mean_cos2 = avg(kCos2);
    r.mean_sin2 = avg(kSin2);
    r.n_sin = avg(kNSin);
    r.n_sin_lz = avg(kNSinLz);
    r.hot_deficit = avg(kHotDeficit);
    r.hot_deficit_cos = avg(kHotDeficitCos);
    r.cold_deficit = avg(kColdDeficit);
    r.cold_deficit_cos = avg(kColdDeficitCos);
    r.sin_nbar = avg(kSinNbar);
    r.sin_nbar_lz = avg(kSinNbarLz);
    r.sin2_nbar2_rate = avg(kSin2Nbar2Rate);
    return r;
}

struct Plan {
    TimeGrid grid;
    std::vector<std::size_t> kept_outputs;
    std::vector<std::size_t> snapshot_outputs;
};

Plan make_plan(const EnsembleConfig& c) {
    c.params.validate();
    if (c.trajectories == 0) throw std::invalid_argument("ensemble needs at least one trajectory");
    if (c.integ.dt > max_stable_dt(c.params) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << c.integ.dt << " exceeds the stability guard "
            << max_stable_dt(c.params);
        throw std::invalid_argument(msg.str());
    }
    Plan plan{TimeGrid::make(c.t_max, c.integ.dt, c.output_stride), {}, {}};
    const std::size_t outputs = plan.grid.outputs();
    if (c.keep_every > 0) {
        for (std::size_t j = 0; j < outputs; j += c.keep_every) plan.kept_outputs.push_back(j);
    }
    const double interval = plan.grid.dt * static_cast<double>(plan.grid.stride);
    for (double t : c.snapshot_times) {
        const double idx = std::round(t / interval);
        if (idx < 0.0 || idx >= static_cast<double>(outputs) ||
            std::abs(idx * interval - t) > 1e-9 * std::max(1.0, t)) {
            throw std::invalid_argument("snapshot time " + std::to_string(t) +
                                        " is not on the output grid");
        }
        plan.snapshot_outputs.push_back(static_cast<std::size_t>(idx));
    }
    return plan;
}

EnsembleSummary make_summary(const EnsembleConfig& c, const Plan& plan) {
    EnsembleSummary out;
    for (std::size_t j : plan.kept_outputs) out.kept_times.push_back(plan.grid.time(j));
    for (std::size_t j : plan.snapshot_outputs) out.snapshots.push_back({plan.grid.time(j), {}, {}});
    (void)c;
    return out;
}

void check_exclusions(const EnsembleSummary& s, std::size_t total) {
    if (static_cast<double>(s.excluded.size()) > kMaxExcludedFraction * static_cast<double>(total)) {
        std::ostringstream msg;
        msg << "ensemble failed: " << s.excluded.size() << " of " << total
            << " trajectories diverged (first index " << s.excluded.front() << ")";
        throw EnsembleDiverged(msg.str());
    }
}

constexpr std::size_t kChunk = 64;

// Per-chunk results, merged into the summary in chunk order.
struct ChunkResult {
    std::vector<TimeAccumulator> acc;
    std::vector<std::uint64_t> excluded;
    std::vector<double> kept_phi;
    std::vector<std::vector<double>> snap_phi, snap_n;
};

void run_chunk(const EnsembleConfig& c, const Plan& plan, const Stepper& stepper,
               std::size_t begin, std::size_t end, ChunkResult& res) {
    const std::size_t outputs = plan.grid.outputs();
    res.acc.assign(outputs, TimeAccumulator{});
    res.excluded.clear();
    res.kept_phi.clear();
    res.snap_phi.assign(plan.snapshot_outputs.size(), {});
    res.snap_n.assign(plan.snapshot_outputs.size(), {});

    std::vector<ClassicalState> path(outputs);
    for (std::size_t i = begin; i < end; ++i) {
        RandomStream rng(derive_seed(c.base_seed, i));
        ClassicalState s = sample_initial(c.init, c.params, c.profile, rng);
        path[0] = s;
        bool ok = true;
        for (std::uint64_t step = 1; step <= plan.grid.steps; ++step) {
            s = stepper.step(s, rng);
            if (step % plan.grid.stride == 0) {
                if (!std::isfinite(s.phi) || !std::isfinite(s.lz) || !std::isfinite(s.n)) {
                    ok = false;
                    break;
                }
                path[step / plan.grid.stride] = s;
            }
        }
        if (!ok) {
            res.excluded.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < outputs; ++j) {
            res.acc[j].add(path[j], sample_terms(path[j], c.params, c.profile));
        }
        for (std::size_t j : plan.kept_outputs) res.kept_phi.push_back(path[j].phi);
        for (std::size_t q = 0; q < plan.snapshot_outputs.size(); ++q) {
            res.snap_phi[q].push_back(path[plan.snapshot_outputs[q]].phi);
            res.snap_n[q].push_back(path[plan.snapshot_outputs[q]].n);
        }
    }
}

void merge_chunk(EnsembleSummary& out, std::vector<TimeAccumulator>& total, ChunkResult& res) {
    for (std::size_t j = 0; j < total.size(); ++j) total[j].merge(res.acc[j]);
    out.excluded.insert(out.excluded.end(), res.excluded.begin(), res.excluded.end());
    out.kept_phi.insert(out.kept_phi.end(), res.kept_phi.begin(), res.kept_phi.end());
    for (std::size_t q = 0; q < out.snapshots.size(); ++q) {
        auto& snap = out.snapshots[q];
        snap.phi.insert(snap.phi.end(), res.snap_phi[q].begin(), res.snap_phi[q].end());
        snap.n.insert(snap.n.end(), res.snap_n[q].begin(), res.snap_n[q].end());
    }
}

} // namespace

EnsembleSummary run_ensemble(const EnsembleConfig& c) {
    const Plan plan = make_plan(c);
    const Stepper stepper(c.params, c.profile, c.integ);
    EnsembleSummary out = make_summary(c, plan);
    std::vector<TimeAccumulator> total(plan.grid.outputs());

    const std::size_t chunks = (c.trajectories + kChunk - 1) / kChunk;
    const auto n_chunks = static_cast<long long>(chunks);

#pragma omp parallel
    {
        ChunkResult res;
#pragma omp for ordered schedule(dynamic, 1)
        for (long long ch = 0; ch < n_chunks; ++ch) {
            const std::size_t begin = static_cast<std::size_t>(ch) * kChunk;
            const std::size_t end = std::min(begin + kChunk, c.trajectories);
            run_chunk(c, plan, stepper, begin, end, res);
#pragma omp ordered
            merge_chunk(out, total, res);
        }
    }

    for (std::size_t j = 0; j < total.size(); ++j) {
        out.records.push_back(finish(plan.grid.time(j), total[j]));
    }
    out.count = c.trajectories - out.excluded.size();
    check_exclusions(out, c.trajectories);
    return out;
}

EnsembleSummary run_ensemble_serial(const EnsembleConfig& c) {
    const Plan plan = make_plan(c);
    EnsembleSummary out = make_summary(c, plan);
    const std::size_t outputs = plan.grid.outputs();

    // Pass 1: plain sums. Pass 2: squared deviations from the pass-1 means.
    std::vector<double> s_lz(outputs), s_phi(outputs), s_n(outputs);
    std::vector<Terms> sums(outputs, Terms{});
    std::vector<bool> diverged(c.trajectories, false);
    for (std::size_t i = 0; i < c.trajectories; ++i) {
        Trajectory tr;
        try {
            tr = simulate_trajectory(c.params, c.profile, c.init, c.t_max, c.integ,
                                     c.output_stride, derive_seed(c.base_seed, i));
        } catch (const DivergenceError&) {
            diverged[i] = true;
            out.excluded.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < outputs; ++j) {
            const auto& s = tr.states[j];
            s_lz[j] += s.lz;
            s_phi[j] += s.phi;
            s_n[j] += s.n;
            const Terms t = sample_terms(s, c.params, c.profile);
            for (std::size_t k = 0; k < kTermCount; ++k) sums[j][k] += t[k];
        }
        for (std::size_t j : plan.kept_outputs) out.kept_phi.push_back(tr.states[j].phi);
        for (std::size_t q = 0; q < plan.snapshot_outputs.size(); ++q) {
            out.snapshots[q].phi.push_back(tr.states[plan.snapshot_outputs[q]].phi);
            out.snapshots[q].n.push_back(tr.states[plan.snapshot_outputs[q]].n);
        }
    }
    out.count = c.trajectories - out.excluded.size();
    check_exclusions(out, c.trajectories);

    const double count = static_cast<double>(out.count);
    std::vector<double> d_lz(outputs), d_phi(outputs), d_n(outputs);
    for (std::size_t i = 0; i < c.trajectories; ++i) {
        if (diverged[i]) continue;
        const Trajectory tr = simulate_trajectory(c.params, c.profile, c.init, c.t_max, c.integ,
                                                  c.output_stride, derive_seed(c.base_seed, i));
        for (std::size_t j = 0; j < outputs; ++j) {
            const auto& s = tr.states[j];
            d_lz[j] += (s.lz - s_lz[j] / count) * (s.lz - s_lz[j] / count);
            d_phi[j] += (s.phi - s_phi[j] / count) * (s.phi - s_phi[j] / count);
            d_n[j] += (s.n - s_n[j] / count) * (s.n - s_n[j] / count);
        }
    }

    for (std::size_t j = 0; j < outputs; ++j) {
        TimeAccumulator acc;
        acc.lz = {count, s_lz[j] / count, d_lz[j]};
        acc.phi = {count, s_phi[j] / count, d_phi[j]};
        acc.n = {count, s_n[j] / count, d_n[j]};
        acc.sums = sums[j];
        out.records.push_back(finish(plan.grid.time(j), acc));
    }
    return out;
}

} // namespace rotor::classical

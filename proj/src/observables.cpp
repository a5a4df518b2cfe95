#include "rotor/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rotor::obs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// <cos>, <sin> of a * phi1 + b * phi2.
double resultant(std::span<const double> phi1, std::span<const double> phi2, double a, double b) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < phi1.size(); ++i) {
        const double x = a * phi1[i] + b * phi2[i];
        c += std::cos(x);
        s += std::sin(x);
    }
    const double n = static_cast<double>(phi1.size());
    return circular_R(c / n, s / n);
}

} // namespace

double circular_R(double cos_mean, double sin_mean) {
    return cos_mean * cos_mean + sin_mean * sin_mean;
}

double circular_R(std::span<const double> phi) { return resultant(phi, phi, 1.0, 0.0); }

double two_time_S(std::span<const double> phi1, std::span<const double> phi2) {
    if (phi1.size() != phi2.size() || phi1.empty()) {
        throw std::invalid_argument("two_time_S: need equally many paired samples");
    }
    const double r_diff = resultant(phi1, phi2, 1.0, -1.0);
    const double r_sum = resultant(phi1, phi2, 1.0, 1.0);
    const double d1 = 1.0 - resultant(phi1, phi1, 2.0, 0.0);
    const double d2 = 1.0 - resultant(phi2, phi2, 2.0, 0.0);
    if (d1 <= kDegenerateThreshold || d2 <= kDegenerateThreshold) {
        throw DegenerateCorrelation("two_time_S: angle distribution is concentrated at a point");
    }
    return std::clamp((r_diff - r_sum) / std::sqrt(d1 * d2), -1.0, 1.0);
}

double two_time_S(const classical::EnsembleSummary& ens, std::size_t i1, std::size_t i2) {
    const std::size_t t = ens.kept_times.size();
    if (i1 >= t || i2 >= t) throw std::out_of_range("two_time_S: time index not stored");
    const std::size_t n = ens.kept_phi.size() / t;
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = ens.kept_phi_at(k, i1);
        b[k] = ens.kept_phi_at(k, i2);
    }
    return two_time_S(a, b);
}

CorrelationGrid correlation_grid(const classical::EnsembleSummary& ens) {
    CorrelationGrid g;
    g.times = ens.kept_times;
    const std::size_t t = g.times.size();
    g.values.assign(t * t, kNaN);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i; j < t; ++j) {
            double v = kNaN;
            try {
                v = two_time_S(ens, i, j);
            } catch (const DegenerateCorrelation&) {
            }
            g.values[i * t + j] = v;
            g.values[j * t + i] = v;
        }
    }
    return g;
}

double work_power(const classical::MomentRecord& r, const EngineParams& p) {
    return r.n_sin_lz / p.inertia;
}

double heat_power(const classical::MomentRecord& r, const EngineParams& p) {
    return p.kappa * (p.omega0 * r.hot_deficit + r.hot_deficit_cos);
}

double cold_power(const classical::MomentRecord& r, const EngineParams& p) {
    return p.kappa * (p.omega0 * r.cold_deficit + r.cold_deficit_cos);
}

std::optional<double> efficiency(double work, double heat) {
    if (!(heat > 0.0)) return std::nullopt;
    return work / heat;
}

std::optional<double> efficiency(const classical::MomentRecord& r, const EngineParams& p) {
    return efficiency(work_power(r, p), heat_power(r, p));
}

std::size_t PVDiagram::empty_bins() const {
    return static_cast<std::size_t>(std::count(count.begin(), count.end(), std::size_t{0}));
}

std::size_t PVDiagram::samples() const {
    return std::accumulate(count.begin(), count.end(), std::size_t{0});
}

namespace {

PVDiagram pv_layout(const EngineParams& p, std::size_t bins) {
    if (bins < 3) throw std::invalid_argument("pv diagram needs at least 3 bins");
    PVDiagram pv;
    const double width = kTwoPi / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double c = (static_cast<double>(b) + 0.5) * width;
        pv.phi_center.push_back(c);
        pv.volume.push_back(-std::cos(c));
        pv.ideal.push_back(nbar_eff(c, p));
    }
    pv.pressure.assign(bins, kNaN);
    pv.count.assign(bins, 0);
    return pv;
}

} // namespace

PVDiagram pv_accumulate(std::span<const double> phi, std::span<const double> n,
                        const EngineParams& p, std::size_t bins) {
    if (phi.size() != n.size()) throw std::invalid_argument("pv_accumulate: size mismatch");
    PVDiagram pv = pv_layout(p, bins);
    std::vector<double> sum(bins, 0.0);
    const double width = kTwoPi / static_cast<double>(bins);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double w = std::fmod(phi[i], kTwoPi);
        if (w < 0.0) w += kTwoPi;
        auto b = static_cast<std::size_t>(w / width);
        if (b >= bins) b = bins - 1;
        sum[b] += n[i];
        ++pv.count[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
        if (pv.count[b] > 0) pv.pressure[b] = sum[b] / static_cast<double>(pv.count[b]);
    }
    return pv;
}

PVDiagram pv_ideal(const EngineParams& p, std::size_t bins) {
    PVDiagram pv = pv_layout(p, bins);
    pv.pressure = pv.ideal;
    pv.count.assign(bins, 1);
    return pv;
}

double cycle_work(const PVDiagram& pv, Orientation orientation) {
    const std::size_t bins = pv.bins();
    if (static_cast<double>(pv.empty_bins()) > 0.05 * static_cast<double>(bins)) {
        throw std::domain_error("cycle_work: more than 5% of bins are empty");
    }
    std::vector<std::size_t> nodes;
    for (std::size_t b = 0; b < bins; ++b) {
        if (pv.count[b] > 0) nodes.push_back(b);
    }
    double work = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t a = nodes[k];
        const std::size_t b = nodes[(k + 1) % nodes.size()];
        double span = pv.phi_center[b] - pv.phi_center[a];
        if (span <= 0.0) span += kTwoPi;
        const double ga = pv.pressure[a] * std::sin(pv.phi_center[a]);
        const double gb = pv.pressure[b] * std::sin(pv.phi_center[b]);
        work += 0.5 * (ga + gb) * span;
    }
    return orientation == Orientation::clockwise ? work : -work;
}

std::vector<double> smoothed_derivative(std::span<const double> y, double h, std::size_t window) {
    if (window % 2 == 0 || window < 3) {
        throw std::invalid_argument("smoothed_derivative: window must be odd and >= 3");
    }
    const std::size_t n = y.size();
    std::vector<double> d(n, kNaN);
    if (n < 2) return d;
    const std::size_t half = window / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = std::min({half, i, n - 1 - i});
        if (m == 0) {
            d[i] = i == 0 ? (y[1] - y[0]) / h : (y[n - 1] - y[n - 2]) / h;
            continue;
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 1; k <= m; ++k) {
            const double kk = static_cast<double>(k);
            num += kk * (y[i + k] - y[i - k]);
            den += 2.0 * kk * kk;
        }
        d[i] = num / (den * h);
    }
    return d;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3) throw std::invalid_argument("fit_line: need >= 3 paired points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        rss += r * r;
    }
    return {slope, intercept, std::sqrt(rss / static_cast<double>(n - 2) / sxx)};
}

} // namespace rotor::obs

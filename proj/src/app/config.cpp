#include "rotor/app/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace rotor::app {

namespace {

const std::map<std::string, Kind> kKinds = {
    {"classical", Kind::classical},
    {"classical-backaction", Kind::classical_backaction},
    {"quantum-master", Kind::quantum_master},
    {"quantum-mcwf", Kind::quantum_mcwf},
    {"analytic", Kind::analytic},
};

std::string scheme_name(classical::Scheme s) {
    return s == classical::Scheme::milstein ? "milstein" : "euler";
}

std::string intensity_name(classical::IntensityInit i) {
    switch (i) {
    case classical::IntensityInit::mean: return "mean";
    case classical::IntensityInit::zero: return "zero";
    default: return "stationary";
    }
}

// Accepts plain numbers and multiples of pi: "pi/2", "3*pi/2", "1.5pi".
std::optional<double> number(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(c));
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && end == s.data() + s.size()) return v;
    static const std::regex pi_form(R"(^([+-]?[0-9]*\.?[0-9]+(?:e[+-]?[0-9]+)?)?\*?pi(?:/([0-9]*\.?[0-9]+))?$)");
    std::smatch m;
    if (!std::regex_match(s, m, pi_form)) {
        if (s == "-pi") return -std::numbers::pi;
        return std::nullopt;
    }
    const double coeff = m[1].matched ? std::stod(m[1].str()) : 1.0;
    const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
    return coeff * std::numbers::pi / den;
}

class Reader {
public:
    std::vector<std::string> errors;
    std::set<std::string> present;

    /// Checks a mapping for unknown keys and returns it (or an empty node).
    YAML::Node section(const YAML::Node& root, const std::string& name,
                       const std::set<std::string>& allowed) {
        const YAML::Node n = root[name];
        if (!n) return YAML::Node();
        if (!n.IsMap()) {
            errors.push_back(fmt::format("{}: expected a mapping", name));
            return YAML::Node();
        }
        for (const auto& kv : n) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.contains(key)) errors.push_back(fmt::format("{}.{}: unknown key", name, key));
        }
        present.insert(name);
        return n;
    }

    template <class Fn>
    void field(const YAML::Node& sec, const std::string& path, const std::string& key, Fn&& apply) {
        if (!sec || !sec[key]) return;
        const YAML::Node v = sec[key];
        const std::string full = path.empty() ? key : path + "." + key;
        present.insert(full);
        try {
            apply(v, full);
        } catch (const YAML::Exception& e) {
            errors.push_back(fmt::format("{}: {}", full, e.msg));
        }
    }

    void real(const YAML::Node& sec, const std::string& path, const std::string& key, double& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            const auto d = v.IsScalar() ? number(v.Scalar()) : std::nullopt;
            if (!d || !std::isfinite(*d))
                errors.push_back(fmt::format("{}: expected a finite number, got '{}'", full, scalar(v)));
            else
                out = *d;
        });
    }

    void real(const YAML::Node& sec, const std::string& path, const std::string& key,
              std::optional<double>& out) {
        double v = 0.0;
        const auto before = errors.size();
        real(sec, path, key, v);
        if (sec && sec[key] && errors.size() == before) out = v;
    }

    template <class Int>
    void integer(const YAML::Node& sec, const std::string& path, const std::string& key, Int& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            const std::string s = scalar(v);
            Int x{};
            auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc() || end != s.data() + s.size())
                errors.push_back(fmt::format("{}: expected an integer in range, got '{}'", full, s));
            else
                out = x;
        });
    }

    void integer(const YAML::Node& sec, const std::string& path, const std::string& key,
                 std::optional<int>& out) {
        int v = 0;
        const auto before = errors.size();
        integer(sec, path, key, v);
        if (sec && sec[key] && errors.size() == before) out = v;
    }

    void boolean(const YAML::Node& sec, const std::string& path, const std::string& key, bool& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            bool b = false;
            if (!YAML::convert<bool>::decode(v, b))
                errors.push_back(fmt::format("{}: expected true or false, got '{}'", full, scalar(v)));
            else
                out = b;
        });
    }

    void text(const YAML::Node& sec, const std::string& path, const std::string& key, std::string& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            if (!v.IsScalar())
                errors.push_back(fmt::format("{}: expected a string", full));
            else
                out = v.Scalar();
        });
    }

    template <class E>
    void choice(const YAML::Node& sec, const std::string& path, const std::string& key,
                const std::map<std::string, E>& options, E& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            const std::string s = scalar(v);
            const auto it = options.find(s);
            if (it == options.end()) {
                std::string list;
                for (const auto& [name, _] : options) list += (list.empty() ? "" : ", ") + name;
                errors.push_back(fmt::format("{}: '{}' is not one of {}", full, s, list));
            } else {
                out = it->second;
            }
        });
    }

    void reals(const YAML::Node& sec, const std::string& path, const std::string& key,
               std::vector<double>& out) {
        field(sec, path, key, [&](const YAML::Node& v, const std::string& full) {
            if (!v.IsSequence()) {
                errors.push_back(fmt::format("{}: expected a list of numbers", full));
                return;
            }
            out.clear();
            for (const auto& item : v) {
                const auto d = item.IsScalar() ? number(item.Scalar()) : std::nullopt;
                if (!d)
                    errors.push_back(fmt::format("{}: '{}' is not a number", full, scalar(item)));
                else
                    out.push_back(*d);
            }
        });
    }

    void require(const std::string& key) {
        if (!present.contains(key)) errors.push_back(fmt::format("{}: required key missing", key));
    }

private:
    static std::string scalar(const YAML::Node& v) { return v.IsScalar() ? v.Scalar() : "<non-scalar>"; }
};

const std::map<std::string, classical::Scheme> kSchemes = {{"euler", classical::Scheme::euler},
                                                           {"milstein", classical::Scheme::milstein}};
const std::map<std::string, classical::IntensityInit> kIntensity = {
    {"stationary", classical::IntensityInit::stationary},
    {"mean", classical::IntensityInit::mean},
    {"zero", classical::IntensityInit::zero}};
const std::map<std::string, bool> kInitMode = {{"deterministic", true}, {"von-mises", false}};

} // namespace

std::string to_string(Kind k) {
    for (const auto& [name, kind] : kKinds)
        if (kind == k) return name;
    return "?";
}

std::optional<Kind> kind_from_string(const std::string& s) {
    const auto it = kKinds.find(s);
    if (it == kKinds.end()) return std::nullopt;
    return it->second;
}

bool is_quantum(Kind k) { return k == Kind::quantum_master || k == Kind::quantum_mcwf; }
bool is_classical(Kind k) { return k == Kind::classical || k == Kind::classical_backaction; }

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string msg = fmt::format("{} configuration error(s):", errors.size());
          for (const auto& e : errors) msg += "\n  " + e;
          return msg;
      }()),
      errors_(std::move(errors)) {}

ExperimentSpec parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError({fmt::format("syntax error: {}", e.what())});
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError({"top level must be a mapping"});

    static const std::set<std::string> top = {"name",     "description", "kind",     "engine",
                                              "init",     "integrator",  "schedule", "ensemble",
                                              "space",    "classical_reference",    "outputs",
                                              "analytic"};
    Reader r;
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (!top.contains(key)) r.errors.push_back(fmt::format("{}: unknown key", key));
    }

    ExperimentSpec s;
    r.text(root, "", "name", s.name);
    r.text(root, "", "description", s.description);
    std::optional<Kind> kind;
    r.field(root, "", "kind", [&](const YAML::Node& v, const std::string&) {
        const std::string name = v.IsScalar() ? v.Scalar() : "";
        kind = kind_from_string(name);
        if (!kind)
            r.errors.push_back(fmt::format(
                "kind: '{}' is not one of classical, classical-backaction, quantum-master, "
                "quantum-mcwf, analytic",
                name));
    });
    if (kind) s.kind = *kind;

    const YAML::Node eng = r.section(root, "engine", {"inertia", "kappa", "n_hot", "n_cold", "omega0"});
    r.real(eng, "engine", "inertia", s.engine.inertia);
    r.real(eng, "engine", "kappa", s.engine.kappa);
    r.real(eng, "engine", "n_hot", s.engine.n_hot);
    r.real(eng, "engine", "n_cold", s.engine.n_cold);
    r.real(eng, "engine", "omega0", s.engine.omega0);

    const YAML::Node ini = r.section(root, "init", {"mode", "k", "mu", "intensity"});
    r.choice(ini, "init", "mode", kInitMode, s.init.deterministic);
    r.real(ini, "init", "k", s.init.k);
    r.real(ini, "init", "mu", s.init.mu);
    r.choice(ini, "init", "intensity", kIntensity, s.init.intensity);

    const YAML::Node integ = r.section(root, "integrator", {"scheme", "dt", "tol", "calibrate"});
    r.choice(integ, "integrator", "scheme", kSchemes, s.integrator.scheme);
    r.real(integ, "integrator", "dt", s.integrator.dt);
    r.real(integ, "integrator", "tol", s.integrator.tol);
    r.boolean(integ, "integrator", "calibrate", s.integrator.calibrate);

    const YAML::Node sched = r.section(root, "schedule", {"t_max", "outputs"});
    r.real(sched, "schedule", "t_max", s.schedule.t_max);
    r.integer(sched, "schedule", "outputs", s.schedule.outputs);

    const YAML::Node ens = r.section(root, "ensemble", {"trajectories", "base_seed"});
    r.integer(ens, "ensemble", "trajectories", s.ensemble.trajectories);
    r.integer(ens, "ensemble", "base_seed", s.ensemble.base_seed);

    const YAML::Node sp =
        r.section(root, "space", {"n_max", "m_min", "m_max", "spread_sigmas", "max_rows", "memory_gb"});
    r.integer(sp, "space", "n_max", s.space.n_max);
    r.integer(sp, "space", "m_min", s.space.m_min);
    r.integer(sp, "space", "m_max", s.space.m_max);
    r.real(sp, "space", "spread_sigmas", s.space.spread_sigmas);
    r.integer(sp, "space", "max_rows", s.space.max_rows);
    r.real(sp, "space", "memory_gb", s.space.memory_gb);

    const YAML::Node ref = r.section(root, "classical_reference",
                                     {"trajectories", "base_seed", "scheme", "dt", "backaction_free",
                                      "backaction"});
    r.integer(ref, "classical_reference", "trajectories", s.reference.trajectories);
    r.integer(ref, "classical_reference", "base_seed", s.reference.base_seed);
    r.choice(ref, "classical_reference", "scheme", kSchemes, s.reference.scheme);
    r.real(ref, "classical_reference", "dt", s.reference.dt);
    r.boolean(ref, "classical_reference", "backaction_free", s.reference.backaction_free);
    r.boolean(ref, "classical_reference", "backaction", s.reference.backaction);

    const YAML::Node out = r.section(root, "outputs",
                                     {"directory", "correlation_every", "pv_times", "pv_bins",
                                      "angle_points", "rate_window", "checkpoint_files"});
    r.text(out, "outputs", "directory", s.outputs.directory);
    r.integer(out, "outputs", "correlation_every", s.outputs.correlation_every);
    r.reals(out, "outputs", "pv_times", s.outputs.pv_times);
    r.integer(out, "outputs", "pv_bins", s.outputs.pv_bins);
    r.integer(out, "outputs", "angle_points", s.outputs.angle_points);
    r.integer(out, "outputs", "rate_window", s.outputs.rate_window);
    r.boolean(out, "outputs", "checkpoint_files", s.outputs.checkpoint_files);

    const YAML::Node an = r.section(root, "analytic", {"x_min", "x_max", "points"});
    r.real(an, "analytic", "x_min", s.analytic.x_min);
    r.real(an, "analytic", "x_max", s.analytic.x_max);
    r.integer(an, "analytic", "points", s.analytic.points);

    // Required keys: common first, then by kind.
    for (const char* k : {"name", "kind", "engine.inertia", "engine.kappa", "engine.n_hot",
                          "engine.n_cold"})
        r.require(k);
    if (kind) {
        if (*kind != Kind::analytic) {
            r.require("schedule.t_max");
            r.require("schedule.outputs");
        }
        if (is_classical(*kind)) {
            for (const char* k : {"init.mode", "integrator.scheme", "integrator.dt",
                                  "ensemble.trajectories", "ensemble.base_seed"})
                r.require(k);
            if (!s.init.deterministic) r.require("init.k");
            r.require("init.mu");
        }
        if (is_quantum(*kind)) {
            for (const char* k : {"init.k", "init.mu", "integrator.tol"}) r.require(k);
            if (*kind == Kind::quantum_mcwf) {
                r.require("ensemble.trajectories");
                r.require("ensemble.base_seed");
            }
        }
        if (*kind == Kind::analytic) r.require("analytic.points");

        // Sections that do not apply to the kind are rejected (typo safety).
        auto reject = [&](const std::string& section, bool applies) {
            if (!applies && r.present.contains(section))
                r.errors.push_back(
                    fmt::format("{}: not used by kind {}", section, to_string(*kind)));
        };
        reject("space", is_quantum(*kind));
        reject("classical_reference", *kind == Kind::quantum_master || *kind == Kind::quantum_mcwf);
        reject("ensemble", is_classical(*kind) || *kind == Kind::quantum_mcwf);
        reject("analytic", *kind == Kind::analytic);
        reject("init", *kind != Kind::analytic);
        reject("integrator", *kind != Kind::analytic);
        reject("schedule", *kind != Kind::analytic);
    }
    if (r.present.contains("integrator.dt") && r.present.contains("integrator.tol"))
        r.errors.push_back(
            "integrator: dt (fixed step) and tol (adaptive) are contradictory; give one of them");
    if (kind && is_quantum(*kind) && r.present.contains("integrator.dt"))
        r.errors.push_back("integrator.dt: quantum kinds are adaptive, use integrator.tol");
    if (kind && is_quantum(*kind) && r.present.contains("integrator.scheme"))
        r.errors.push_back("integrator.scheme: quantum kinds always use the embedded 5(4) pair");
    if (kind && is_classical(*kind) && r.present.contains("integrator.tol"))
        r.errors.push_back("integrator.tol: classical kinds use a fixed step, use integrator.dt");
    if (kind && is_quantum(*kind) && r.present.contains("init.mode") && s.init.deterministic)
        r.errors.push_back("init.mode: quantum kinds start from a von Mises state");

    if (r.errors.empty()) {
        auto more = validate(s);
        r.errors.insert(r.errors.end(), more.begin(), more.end());
    }
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return s;
}

std::vector<std::string> validate(const ExperimentSpec& s) {
    std::vector<std::string> e;
    if (s.name.empty()) e.push_back("name: must not be empty");
    for (char c : s.output_directory())
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            e.push_back(fmt::format("name/outputs.directory: character '{}' not allowed", c));
    try {
        s.engine.validate();
    } catch (const std::invalid_argument& ex) {
        std::istringstream lines(ex.what());
        for (std::string line; std::getline(lines, line);)
            if (!line.empty()) e.push_back("engine: " + line);
    }
    if (s.engine.n_hot < s.engine.n_cold)
        e.push_back("engine: n_hot < n_cold drives the engine backwards; swap the baths");
    if (s.kind != Kind::analytic) {
        if (!(s.schedule.t_max > 0.0)) e.push_back("schedule.t_max: must be > 0");
        if (s.schedule.outputs < 1) e.push_back("schedule.outputs: must be >= 1");
    }
    if (is_classical(s.kind) || (is_quantum(s.kind) && !s.init.deterministic)) {
        if (!s.init.deterministic && s.init.k < 1.0) e.push_back("init.k: must be >= 1");
    }
    if (is_classical(s.kind)) {
        if (!s.integrator.dt || !(*s.integrator.dt > 0.0)) e.push_back("integrator.dt: must be > 0");
        if (s.ensemble.trajectories < 1) e.push_back("ensemble.trajectories: must be >= 1");
        if (s.outputs.correlation_every > s.schedule.outputs)
            e.push_back("outputs.correlation_every: larger than the number of outputs");
        for (double t : s.outputs.pv_times)
            if (t < 0.0 || t > s.schedule.t_max)
                e.push_back(fmt::format("outputs.pv_times: {} outside [0, t_max]", t));
        if (s.outputs.pv_bins < 4) e.push_back("outputs.pv_bins: must be >= 4");
        if (s.outputs.rate_window < 3 || s.outputs.rate_window % 2 == 0)
            e.push_back("outputs.rate_window: must be odd and >= 3");
    }
    if (is_quantum(s.kind)) {
        if (!s.integrator.tol || !(*s.integrator.tol > 0.0)) e.push_back("integrator.tol: must be > 0");
        if (s.space.n_max && *s.space.n_max < 1) e.push_back("space.n_max: must be >= 1");
        if (s.space.m_min.has_value() != s.space.m_max.has_value())
            e.push_back("space: give both m_min and m_max or neither");
        if (s.space.m_min && s.space.m_max && !(*s.space.m_min < 0 && *s.space.m_max > 0))
            e.push_back("space: need m_min < 0 < m_max");
        if (s.outputs.angle_points < 0) e.push_back("outputs.angle_points: must be >= 0");
        if (!s.outputs.pv_times.empty()) e.push_back("outputs.pv_times: classical kinds only");
        if (s.reference.trajectories > 0 && s.reference.dt && !(*s.reference.dt > 0.0))
            e.push_back("classical_reference.dt: must be > 0");
        if (s.kind == Kind::quantum_mcwf) {
            if (s.ensemble.trajectories < 2) e.push_back("ensemble.trajectories: need >= 2 for MCWF");
            if (s.outputs.correlation_every > 0)
                e.push_back("outputs.correlation_every: not available for quantum-mcwf");
        }
    }
    if (s.kind == Kind::analytic) {
        if (!(s.analytic.x_min > 0.0 && s.analytic.x_max > s.analytic.x_min))
            e.push_back("analytic: need 0 < x_min < x_max");
        if (s.analytic.points < 2) e.push_back("analytic.points: must be >= 2");
        if (s.engine.n_hot == s.engine.n_cold) e.push_back("analytic: efficiency undefined for n_hot == n_cold");
    }
    return e;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({fmt::format("cannot read '{}'", path)});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const ExperimentSpec& s) {
    YAML::Emitter y;
    y.SetDoublePrecision(17);
    y << YAML::BeginMap;
    y << YAML::Key << "name" << YAML::Value << s.name;
    if (!s.description.empty()) y << YAML::Key << "description" << YAML::Value << s.description;
    y << YAML::Key << "kind" << YAML::Value << to_string(s.kind);
    y << YAML::Key << "engine" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "inertia" << YAML::Value << s.engine.inertia;
    y << YAML::Key << "kappa" << YAML::Value << s.engine.kappa;
    y << YAML::Key << "n_hot" << YAML::Value << s.engine.n_hot;
    y << YAML::Key << "n_cold" << YAML::Value << s.engine.n_cold;
    y << YAML::Key << "omega0" << YAML::Value << s.engine.omega0;
    y << YAML::EndMap;

    if (s.kind == Kind::analytic) {
        y << YAML::Key << "analytic" << YAML::Value << YAML::BeginMap;
        y << YAML::Key << "x_min" << YAML::Value << s.analytic.x_min;
        y << YAML::Key << "x_max" << YAML::Value << s.analytic.x_max;
        y << YAML::Key << "points" << YAML::Value << s.analytic.points;
        y << YAML::EndMap;
    } else {
        y << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
        y << YAML::Key << "mode" << YAML::Value
          << (s.init.deterministic ? "deterministic" : "von-mises");
        y << YAML::Key << "intensity" << YAML::Value << intensity_name(s.init.intensity);
        y << YAML::Key << "k" << YAML::Value << s.init.k;
        y << YAML::Key << "mu" << YAML::Value << s.init.mu;
        y << YAML::EndMap;

        y << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
        if (is_classical(s.kind)) {
            y << YAML::Key << "scheme" << YAML::Value << scheme_name(s.integrator.scheme);
            if (s.integrator.dt) y << YAML::Key << "dt" << YAML::Value << *s.integrator.dt;
        } else {
            if (s.integrator.tol) y << YAML::Key << "tol" << YAML::Value << *s.integrator.tol;
        }
        y << YAML::Key << "calibrate" << YAML::Value << s.integrator.calibrate;
        y << YAML::EndMap;

        y << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
        y << YAML::Key << "t_max" << YAML::Value << s.schedule.t_max;
        y << YAML::Key << "outputs" << YAML::Value << s.schedule.outputs;
        y << YAML::EndMap;

        if (is_classical(s.kind) || s.kind == Kind::quantum_mcwf) {
            y << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
            y << YAML::Key << "trajectories" << YAML::Value << s.ensemble.trajectories;
            y << YAML::Key << "base_seed" << YAML::Value << s.ensemble.base_seed;
            y << YAML::EndMap;
        }
        if (is_quantum(s.kind)) {
            y << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
            if (s.space.n_max) y << YAML::Key << "n_max" << YAML::Value << *s.space.n_max;
            if (s.space.m_min) y << YAML::Key << "m_min" << YAML::Value << *s.space.m_min;
            if (s.space.m_max) y << YAML::Key << "m_max" << YAML::Value << *s.space.m_max;
            y << YAML::Key << "spread_sigmas" << YAML::Value << s.space.spread_sigmas;
            y << YAML::Key << "max_rows" << YAML::Value << s.space.max_rows;
            y << YAML::Key << "memory_gb" << YAML::Value << s.space.memory_gb;
            y << YAML::EndMap;

            y << YAML::Key << "classical_reference" << YAML::Value << YAML::BeginMap;
            y << YAML::Key << "trajectories" << YAML::Value << s.reference.trajectories;
            y << YAML::Key << "base_seed" << YAML::Value << s.reference.base_seed;
            y << YAML::Key << "scheme" << YAML::Value << scheme_name(s.reference.scheme);
            if (s.reference.dt) y << YAML::Key << "dt" << YAML::Value << *s.reference.dt;
            y << YAML::Key << "backaction_free" << YAML::Value << s.reference.backaction_free;
            y << YAML::Key << "backaction" << YAML::Value << s.reference.backaction;
            y << YAML::EndMap;
        }
    }

    y << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
    if (!s.outputs.directory.empty()) y << YAML::Key << "directory" << YAML::Value << s.outputs.directory;
    if (s.kind != Kind::analytic) {
        y << YAML::Key << "correlation_every" << YAML::Value << s.outputs.correlation_every;
        y << YAML::Key << "pv_times" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double t : s.outputs.pv_times) y << t;
        y << YAML::EndSeq;
        y << YAML::Key << "pv_bins" << YAML::Value << s.outputs.pv_bins;
        y << YAML::Key << "rate_window" << YAML::Value << s.outputs.rate_window;
        y << YAML::Key << "angle_points" << YAML::Value << s.outputs.angle_points;
        y << YAML::Key << "checkpoint_files" << YAML::Value << s.outputs.checkpoint_files;
    }
    y << YAML::EndMap;
    y << YAML::EndMap;
    return std::string(y.c_str()) + "\n";
}

} // namespace rotor::app

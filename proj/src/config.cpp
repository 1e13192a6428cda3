#include "parcomm/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace parcomm {

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::SingleLink: return "single-link";
        case ScenarioKind::Platoon: return "platoon";
        case ScenarioKind::MultiPlatoon: return "multi-platoon";
        case ScenarioKind::Uav: return "uav";
    }
    return "?";
}

std::string to_string(RunMode m) { return m == RunMode::Parallel ? "parallel" : "baseline"; }

namespace {

ScenarioKind parse_scenario(const std::string& s) {
    for (auto k : {ScenarioKind::SingleLink, ScenarioKind::Platoon, ScenarioKind::MultiPlatoon, ScenarioKind::Uav})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown scenario '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long i = 0;
    try {
        i = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return i;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string render_drops(const std::vector<DropRule>& drops) {
    std::string out;
    for (const DropRule& d : drops) {
        if (!out.empty()) out += ",";
        out += to_string(d.kind) + "@" + std::to_string(d.from);
        if (d.count != 1) out += ":" + std::to_string(d.count);
        if (d.node >= 0) out += "/" + std::to_string(d.node);
    }
    return out;
}

std::vector<DropRule> parse_drops(const std::string& key, const std::string& v) {
    std::vector<DropRule> out;
    for (const std::string& item : split(v, ',')) {
        DropRule d;
        std::string rest = item;
        const auto at = rest.find('@');
        if (at == std::string::npos) throw ConfigError(key + ": expected Kind@slot[:count][/node], got '" + item + "'");
        try {
            d.kind = parse_packet_kind(rest.substr(0, at));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
        rest = rest.substr(at + 1);
        if (const auto slash = rest.find('/'); slash != std::string::npos) {
            d.node = static_cast<NodeId>(to_int(key, rest.substr(slash + 1)));
            rest = rest.substr(0, slash);
        }
        if (const auto colon = rest.find(':'); colon != std::string::npos) {
            d.count = static_cast<int>(to_int(key, rest.substr(colon + 1)));
            rest = rest.substr(0, colon);
        }
        d.from = to_int(key, rest);
        if (d.count < 1 || d.from < 0) throw ConfigError(key + ": bad drop rule '" + item + "'");
        out.push_back(d);
    }
    return out;
}

std::string render_schedule(const SpeedSchedule& s) {
    std::string out;
    for (const auto& r : s.ramps) {
        if (!out.empty()) out += ",";
        out += fmt(r.t_start) + ":" + fmt(r.t_end) + ":" + fmt(r.v_from) + ":" + fmt(r.v_to);
    }
    return out;
}

SpeedSchedule parse_schedule(const std::string& key, const std::string& v) {
    SpeedSchedule s;
    for (const std::string& item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 4) throw ConfigError(key + ": expected t_start:t_end:v_from:v_to, got '" + item + "'");
        SpeedSchedule::Ramp r{to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]),
                              to_double(key, parts[3])};
        if (!(r.t_end > r.t_start)) throw ConfigError(key + ": ramp must end after it starts");
        s.ramps.push_back(r);
    }
    return s;
}

std::string render_list(const std::vector<double>& v) {
    std::string out;
    for (double d : v) {
        if (!out.empty()) out += ",";
        out += fmt(d);
    }
    return out;
}

struct Key {
    std::string name;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
Key int_key(std::string name, T ScenarioConfig::*field) {
    return {name, [name, field](ScenarioConfig& c, const std::string& v) { c.*field = static_cast<T>(to_int(name, v)); },
            [field](const ScenarioConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(std::string name, double ScenarioConfig::*field) {
    return {name, [name, field](ScenarioConfig& c, const std::string& v) { c.*field = to_double(name, v); },
            [field](const ScenarioConfig& c) { return fmt(c.*field); }};
}

// Keys reaching into nested structs use accessors.
template <class Get>
Key nested_int(std::string name, Get ref) {
    return {name,
            [name, ref](ScenarioConfig& c, const std::string& v) {
                ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(to_int(name, v));
            },
            [ref](const ScenarioConfig& c) { return std::to_string(ref(const_cast<ScenarioConfig&>(c))); }};
}

template <class Get>
Key nested_double(std::string name, Get ref) {
    return {name, [name, ref](ScenarioConfig& c, const std::string& v) { ref(c) = to_double(name, v); },
            [ref](const ScenarioConfig& c) { return fmt(ref(const_cast<ScenarioConfig&>(c))); }};
}

template <class Get>
Key nested_bool(std::string name, Get ref) {
    return {name, [name, ref](ScenarioConfig& c, const std::string& v) { ref(c) = to_bool(name, v); },
            [ref](const ScenarioConfig& c) { return std::string(ref(const_cast<ScenarioConfig&>(c)) ? "true" : "false"); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> k = [] {
        std::vector<Key> v;
        v.push_back({"config_version",
                     [](ScenarioConfig& c, const std::string& s) {
                         c.config_version = static_cast<int>(to_int("config_version", s));
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.config_version); }});
        v.push_back({"scenario", [](ScenarioConfig& c, const std::string& s) { c.scenario = parse_scenario(s); },
                     [](const ScenarioConfig& c) { return to_string(c.scenario); }});
        v.push_back({"seed",
                     [](ScenarioConfig& c, const std::string& s) {
                         const long long x = to_int("seed", s);
                         if (x < 0) throw ConfigError("seed must be non-negative");
                         c.seed = static_cast<std::uint64_t>(x);
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
        v.push_back(int_key("duration", &ScenarioConfig::duration));
        v.push_back({"mode",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "parallel") c.mode = RunMode::Parallel;
                         else if (s == "baseline") c.mode = RunMode::Baseline;
                         else throw ConfigError("mode: expected parallel or baseline, got '" + s + "'");
                     },
                     [](const ScenarioConfig& c) { return to_string(c.mode); }});
        v.push_back(nested_int("baseline.interval", [](ScenarioConfig& c) -> int& { return c.link.baseline_interval; }));

        v.push_back(nested_double("link.delta", [](ScenarioConfig& c) -> double& { return c.link.delta; }));
        v.push_back({"link.error",
                     [](ScenarioConfig& c, const std::string& s) {
                         try {
                             c.link.g = parse_error_measure(s);
                         } catch (const std::invalid_argument& e) {
                             throw ConfigError(std::string("link.error: ") + e.what());
                         }
                     },
                     [](const ScenarioConfig& c) { return to_string(c.link.g); }});
        v.push_back(nested_int("link.decision_period", [](ScenarioConfig& c) -> int& { return c.link.decision_period; }));
        v.push_back(nested_int("link.t_model", [](ScenarioConfig& c) -> int& { return c.link.t_model; }));
        v.push_back(nested_int("link.t_corr", [](ScenarioConfig& c) -> int& { return c.link.t_corr; }));
        v.push_back(nested_int("link.window", [](ScenarioConfig& c) -> int& { return c.link.window; }));
        v.push_back(nested_double("link.rcond", [](ScenarioConfig& c) -> double& { return c.link.rcond; }));
        v.push_back(nested_bool("link.stagger", [](ScenarioConfig& c) -> bool& { return c.link.stagger; }));
        v.push_back(nested_bool("link.hold_prior", [](ScenarioConfig& c) -> bool& { return c.link.hold_prior; }));
        v.push_back(nested_int("link.n_input", [](ScenarioConfig& c) -> int& { return c.link.n_input; }));
        v.push_back(nested_int("link.confirm_timeout", [](ScenarioConfig& c) -> int& { return c.link.confirm_timeout; }));
        v.push_back(nested_int("link.confirm_repeats", [](ScenarioConfig& c) -> int& { return c.link.confirm_repeats; }));
        v.push_back(nested_int("link.adopt_lead", [](ScenarioConfig& c) -> int& { return c.link.adopt_lead; }));
        v.push_back(nested_bool("link.timestamps", [](ScenarioConfig& c) -> bool& { return c.link.timestamps; }));
        v.push_back(nested_bool("link.feedback", [](ScenarioConfig& c) -> bool& { return c.link.feedback; }));
        v.push_back({"link.initial_model",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "hold") c.link.initial_model = InitialModel::Hold;
                         else if (s == "zero") c.link.initial_model = InitialModel::Zero;
                         else throw ConfigError("link.initial_model: expected hold or zero, got '" + s + "'");
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.link.initial_model == InitialModel::Hold ? "hold" : "zero");
                     }});
        v.push_back(int_key("link.tau", &ScenarioConfig::tau));

        v.push_back({"mac.kind",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s == "cv2x") c.mac.kind = MacKind::Cv2x;
                         else if (s == "ideal") c.mac.kind = MacKind::Ideal;
                         else throw ConfigError("mac.kind: expected cv2x or ideal, got '" + s + "'");
                     },
                     [](const ScenarioConfig& c) { return std::string(c.mac.kind == MacKind::Cv2x ? "cv2x" : "ideal"); }});
        v.push_back(nested_int("mac.rri", [](ScenarioConfig& c) -> int& { return c.mac.pool.rri; }));
        v.push_back(nested_int("mac.subchannels", [](ScenarioConfig& c) -> int& { return c.mac.pool.subchannels; }));
        v.push_back(nested_double("mac.p_loss", [](ScenarioConfig& c) -> double& { return c.mac.p_loss; }));

        v.push_back(double_key("noise.distance", &ScenarioConfig::noise_distance));
        v.push_back(double_key("noise.velocity", &ScenarioConfig::noise_velocity));
        v.push_back(double_key("noise.acceleration", &ScenarioConfig::noise_acceleration));
        v.push_back({"model.constant",
                     [](ScenarioConfig& c, const std::string& s) { c.model_constant = to_bool("model.constant", s); },
                     [](const ScenarioConfig& c) { return std::string(c.model_constant ? "true" : "false"); }});

        for (int i = 0; i < 5; ++i)
            v.push_back(nested_double("cacc.w" + std::to_string(i + 1),
                                      [i](ScenarioConfig& c) -> double& { return c.cacc.omega[static_cast<std::size_t>(i)]; }));
        v.push_back(nested_double("plant.d_des", [](ScenarioConfig& c) -> double& { return c.cacc.d_des; }));
        v.push_back(nested_double("plant.a_min", [](ScenarioConfig& c) -> double& { return c.cacc.a_min; }));
        v.push_back(nested_double("plant.a_max", [](ScenarioConfig& c) -> double& { return c.cacc.a_max; }));
        v.push_back(double_key("plant.v0", &ScenarioConfig::v0));
        v.push_back(double_key("plant.length", &ScenarioConfig::vehicle_length));
        v.push_back(int_key("control.period", &ScenarioConfig::control_period));

        v.push_back({"leader.profile",
                     [](ScenarioConfig& c, const std::string& s) {
                         if (s != "none" && s != "parabola" && s != "schedule")
                             throw ConfigError("leader.profile: expected none, parabola or schedule, got '" + s + "'");
                         c.leader_profile = s;
                     },
                     [](const ScenarioConfig& c) { return c.leader_profile; }});
        v.push_back(int_key("leader.t0", &ScenarioConfig::leader_t0));
        v.push_back(int_key("leader.t1", &ScenarioConfig::leader_t1));
        v.push_back(double_key("leader.peak", &ScenarioConfig::leader_peak));
        v.push_back({"leader.raw", [](ScenarioConfig& c, const std::string& s) { c.leader_raw = to_bool("leader.raw", s); },
                     [](const ScenarioConfig& c) { return std::string(c.leader_raw ? "true" : "false"); }});
        v.push_back({"leader.schedule",
                     [](ScenarioConfig& c, const std::string& s) { c.leader_schedule = parse_schedule("leader.schedule", s); },
                     [](const ScenarioConfig& c) { return render_schedule(c.leader_schedule); }});

        v.push_back(int_key("platoon.count", &ScenarioConfig::platoon_count));
        v.push_back(int_key("platoon.size", &ScenarioConfig::platoon_size));
        v.push_back(double_key("platoon.gap", &ScenarioConfig::platoon_gap));
        v.push_back(int_key("uav.count", &ScenarioConfig::uav_count));
        v.push_back(double_key("uav.spacing", &ScenarioConfig::uav_spacing));

        v.push_back(nested_bool("smart.enabled", [](ScenarioConfig& c) -> bool& { return c.smart.enabled; }));
        v.push_back(nested_bool("smart.adaptive", [](ScenarioConfig& c) -> bool& { return c.smart.adaptive; }));
        v.push_back(nested_double("smart.m_min", [](ScenarioConfig& c) -> double& { return c.smart.grid.m_min; }));
        v.push_back(nested_double("smart.m_max", [](ScenarioConfig& c) -> double& { return c.smart.grid.m_max; }));
        v.push_back(nested_double("smart.m_int", [](ScenarioConfig& c) -> double& { return c.smart.grid.m_int; }));
        v.push_back(nested_double("smart.m_init", [](ScenarioConfig& c) -> double& { return c.smart.m_init; }));
        v.push_back(nested_int("smart.eval_int", [](ScenarioConfig& c) -> int& { return c.smart.eval_int; }));
        v.push_back(nested_double("smart.adapt_fraction", [](ScenarioConfig& c) -> double& { return c.smart.adapt_fraction; }));
        v.push_back({"smart.levels",
                     [](ScenarioConfig& c, const std::string& s) {
                         std::vector<double> out;
                         for (const auto& p : split(s, ',')) out.push_back(to_double("smart.levels", p));
                         c.smart.levels = out;
                     },
                     [](const ScenarioConfig& c) { return render_list(c.smart.levels); }});
        v.push_back(nested_int("smart.calib_duration", [](ScenarioConfig& c) -> Slot& { return c.smart.calib_duration; }));
        v.push_back(nested_int("smart.reseed_epochs", [](ScenarioConfig& c) -> int& { return c.smart.reseed_epochs; }));
        v.push_back({"smart.bank_dir", [](ScenarioConfig& c, const std::string& s) { c.smart.bank_dir = s; },
                     [](const ScenarioConfig& c) { return c.smart.bank_dir; }});

        v.push_back({"inject.drop", [](ScenarioConfig& c, const std::string& s) { c.drops = parse_drops("inject.drop", s); },
                     [](const ScenarioConfig& c) { return render_drops(c.drops); }});
        return v;
    }();
    return k;
}

const Key& find_key(const std::string& name) {
    for (const Key& k : keys())
        if (k.name == name) return k;
    throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

ScenarioConfig scenario_defaults(ScenarioKind kind) {
    ScenarioConfig c;
    c.scenario = kind;
    // The single-link and three-vehicle tests run on a dedicated radio link;
    // the larger scenarios share a C-V2X resource pool.
    c.mac.kind = kind == ScenarioKind::SingleLink || kind == ScenarioKind::Platoon ? MacKind::Ideal : MacKind::Cv2x;
    // Confirmations cross up to two selection windows on the shared medium.
    c.link.confirm_timeout = 30;
    c.link.adopt_lead = 20;
    // Closed-loop windows barely excite the commanded acceleration; a plain
    // minimum-norm fit then puts large, wrongly signed weight on it. Fitting
    // the residual over a hold model and cutting weak directions keeps
    // unexcited components at their last value.
    c.link.hold_prior = true;
    c.link.rcond = 1e-2;
    // Several sources share the medium: spread their calibration and
    // correction ticks so they do not contend in the same window.
    c.link.stagger = kind != ScenarioKind::SingleLink;
    switch (kind) {
        case ScenarioKind::SingleLink:
            c.duration = 6000;
            c.platoon_count = 1;
            c.platoon_size = 2;
            c.link.delta = 0.1;
            c.link.t_model = 100;
            c.link.t_corr = 1000;
            c.leader_profile = "parabola";
            c.leader_t0 = 478;
            c.leader_t1 = 2478;
            c.leader_peak = 4.0;
            break;
        case ScenarioKind::Platoon:
            c.duration = 6000;
            c.platoon_count = 1;
            c.platoon_size = 3;
            c.link.delta = 0.15;
            c.link.t_model = 100;
            c.link.t_corr = 1000;
            c.leader_profile = "parabola";
            c.leader_t0 = 2400;
            c.leader_t1 = 4000;
            c.leader_peak = 4.0;
            break;
        case ScenarioKind::MultiPlatoon:
            c.duration = 35000;
            c.platoon_count = 3;
            c.platoon_size = 8;
            c.link.delta = 0.15;
            c.link.t_model = 500;
            c.link.t_corr = 500;
            c.leader_profile = "schedule";
            c.leader_schedule.ramps = {{0.0, 5.0, 10.0, 22.2}, {15.0, 20.0, 22.2, 9.7}, {20.0, 35.0, 9.7, 22.2}};
            break;
        case ScenarioKind::Uav:
            c.duration = 20000;
            c.uav_count = 10;
            c.link.delta = 0.1;
            c.link.t_model = 1000;
            c.link.t_corr = 1000;
            c.leader_profile = "none";  // the UAV leader follows its own velocity schedule
            c.v0 = 0.0;
            c.cacc.d_des = 0.0;
            c.cacc.a_min = -4.0;
            c.cacc.a_max = 4.0;
            break;
    }
    return c;
}

void ScenarioConfig::validate() const {
    if (config_version != 1) throw ConfigError("config_version must be 1");
    if (duration < 0) throw ConfigError("duration must be >= 0");
    if (tau < 0) throw ConfigError("link.tau must be >= 0");
    if (control_period < 1) throw ConfigError("control.period must be >= 1");
    if (noise_distance < 0 || noise_velocity < 0 || noise_acceleration < 0)
        throw ConfigError("noise sigmas must be >= 0");
    if (vehicle_length < 0) throw ConfigError("plant.length must be >= 0");
    if (platoon_count < 1) throw ConfigError("platoon.count must be >= 1");
    if (platoon_size < 2) throw ConfigError("platoon.size must be >= 2");
    if (uav_count < 2) throw ConfigError("uav.count must be >= 2");
    if (leader_profile == "parabola" && leader_t0 >= leader_t1) throw ConfigError("leader.t0 must precede leader.t1");
    if (smart.eval_int < 1) throw ConfigError("smart.eval_int must be >= 1");
    if (smart.reseed_epochs < 1) throw ConfigError("smart.reseed_epochs must be >= 1");
    if (smart.calib_duration < 0) throw ConfigError("smart.calib_duration must be >= 0");
    if (smart.adapt_fraction < 0) throw ConfigError("smart.adapt_fraction must be >= 0");
    try {
        link.validate();
        mac.pool.validate();
        cacc.validate();
        smart.grid.validate();
        ErrorGrid check(smart.levels);
        (void)check;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(mac.p_loss >= 0.0 && mac.p_loss <= 1.0)) throw ConfigError("mac.p_loss must be in [0,1]");
    if (smart.m_init < smart.grid.m_min || smart.m_init > smart.grid.m_max)
        throw ConfigError("smart.m_init must lie in [smart.m_min, smart.m_max]");
}

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    const Key& k = find_key(trim(key));
    if (k.name == "scenario") {
        // Switching scenario resets to its defaults, keeping the seed.
        const auto seed = cfg.seed;
        cfg = scenario_defaults(parse_scenario(trim(value)));
        cfg.seed = seed;
        return;
    }
    k.set(cfg, trim(value));
}

ScenarioConfig parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    ScenarioKind kind = ScenarioKind::SingleLink;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        find_key(key);
        for (const auto& e : entries)
            if (e.first == key) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (key == "scenario") kind = parse_scenario(value);
        entries.emplace_back(key, value);
    }
    ScenarioConfig cfg = scenario_defaults(kind);
    for (const auto& [key, value] : entries)
        if (key != "scenario") find_key(key).set(cfg, value);
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Key& k : keys()) out.emplace_back(k.name, k.get(cfg));
    return out;
}

std::string render_config(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const Key& k : keys()) out.push_back(k.name);
    return out;
}

}  // namespace parcomm

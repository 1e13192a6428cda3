#pragma once

#include "parcomm/link.hpp"
#include "parcomm/mac.hpp"
#include "parcomm/plant.hpp"
#include "parcomm/smart.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace parcomm {

/// Raised for anything wrong with a configuration (unknown key, bad value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { SingleLink, Platoon, MultiPlatoon, Uav };
enum class RunMode { Parallel, Baseline };

std::string to_string(ScenarioKind k);
std::string to_string(RunMode m);

/// Scripted, invisible loss: the next `count` packets of `kind` sent at or
/// after slot `from` (by `node`, or any node when -1) are lost at every
/// receiver while the sender still sees them as delivered.
struct DropRule {
    PacketKind kind = PacketKind::StatusOTA;
    Slot from = 0;
    int count = 1;
    NodeId node = -1;
};

struct SmartConfig {
    bool enabled = false;
    bool adaptive = true;
    AuxCostGrid grid{0.0, 1.0, 0.1};
    double m_init = 0.0;
    int eval_int = 1000;
    double adapt_fraction = 0.05;
    std::vector<double> levels{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};  // multiples of link.delta
    Slot calib_duration = 10000;  // slots of the transition-estimation pre-run
    int reseed_epochs = 20;
    std::string bank_dir;
};

struct ScenarioConfig {
    int config_version = 1;
    ScenarioKind scenario = ScenarioKind::SingleLink;
    std::uint64_t seed = 1;
    Slot duration = 6000;
    RunMode mode = RunMode::Parallel;

    LinkParams link;
    int tau = 0;  // receiver processing latency, slots
    MacParams mac;

    // Sensing noise standard deviations.
    double noise_distance = 0.01;      // m (inter-vehicle gap, or UAV position)
    double noise_velocity = 0.01;      // m/s
    double noise_acceleration = 0.0;   // m/s^2

    // Append a constant 1 to every status vector as an exogenous component,
    // giving the fitted model an intercept column.
    bool model_constant = false;

    CaccGains cacc;
    double v0 = 10.0;
    double vehicle_length = 5.0;
    int control_period = 10;

    // Leader motion.
    std::string leader_profile = "parabola";  // none | parabola | schedule
    Slot leader_t0 = 478;
    Slot leader_t1 = 2478;
    double leader_peak = 4.0;
    bool leader_raw = false;
    SpeedSchedule leader_schedule;

    int platoon_count = 1;
    int platoon_size = 2;       // vehicles per platoon including the leader
    double platoon_gap = 50.0;  // m between the last vehicle of one platoon and the next leader

    int uav_count = 10;
    double uav_spacing = 5.0;   // m between formation slots

    SmartConfig smart;
    std::vector<DropRule> drops;

    void validate() const;
};

/// Defaults of a scenario before any key is applied.
ScenarioConfig scenario_defaults(ScenarioKind kind);

/// Flat `key = value` text, `#` comments. `scenario` (if present) selects the
/// defaults; every other key overrides them. Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Apply one override on top of an existing config.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its current value, in a stable order; parse_config of the
/// rendered text reproduces the config.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg);
std::string render_config(const ScenarioConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace parcomm

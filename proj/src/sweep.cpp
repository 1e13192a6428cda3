#include "parcomm/sweep.hpp"

#include <cstdio>

namespace parcomm {

std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& key, const std::vector<std::string>& values,
                            SeedPolicy policy) {
    if (key == "scenario" || key == "config_version" || key == "seed")
        throw ConfigError("'" + key + "' cannot be swept");
    std::vector<ScenarioConfig> configs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ScenarioConfig c = base;
        apply_setting(c, key, values[i]);
        if (policy == SeedPolicy::PerValue) c.seed = base.seed + i;
        c.validate();
        configs.push_back(std::move(c));
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < configs.size(); ++i)
        rows.push_back(SweepRow{values[i], configs[i].seed, run(configs[i]).summary});
    return rows;
}

std::string sweep_table_csv(const std::string& key, const std::vector<SweepRow>& rows) {
    std::string out = key +
                      ",seed,status_ota,calibration,confirmation,correction,control,occupancy,collision,half_duplex,"
                      "channel_loss,min_safe_distance,distance_rms,mean_error,max_error,mean_aoi,misaligned_slots,crash\n";
    char buf[512];
    for (const SweepRow& r : rows) {
        const RunSummary& s = r.summary;
        std::snprintf(buf, sizeof buf, ",%llu,%lld,%lld,%lld,%lld,%lld,%.17g,%lld,%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%d\n",
                      static_cast<unsigned long long>(r.seed), s.status_ota, s.calibration, s.confirmation,
                      s.correction, s.control, s.occupancy, s.collision, s.half_duplex, s.channel_loss,
                      s.min_safe_distance, s.distance_rms, s.mean_error, s.max_error, s.mean_aoi,
                      s.misaligned_slots, s.crash ? 1 : 0);
        out += r.value;
        out += buf;
    }
    return out;
}

}  // namespace parcomm

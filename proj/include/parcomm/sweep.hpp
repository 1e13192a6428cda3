#pragma once

#include "parcomm/engine.hpp"

#include <string>
#include <vector>

namespace parcomm {

enum class SeedPolicy { Same, PerValue };

struct SweepRow {
    std::string value;
    std::uint64_t seed = 0;
    RunSummary summary;
};

/// One run per value of `key`. With SeedPolicy::PerValue the i-th run uses
/// seed + i. Throws ConfigError for keys that cannot be swept or bad values.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& key, const std::vector<std::string>& values,
                            SeedPolicy policy = SeedPolicy::Same);

/// Summary table, one row per run.
std::string sweep_table_csv(const std::string& key, const std::vector<SweepRow>& rows);

}  // namespace parcomm

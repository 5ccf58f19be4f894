#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fusesim/buffers.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/tiling.hpp"

namespace fusesim {

// Stable report schema: byte and cycle counts are JSON integers, ratios are
// floats, and an infinite PSNR is written as the string "inf".

nlohmann::json to_json(const Range& r);
nlohmann::json to_json(const FusionConfig& cfg);
nlohmann::json to_json(const StripPlan& plan);
nlohmann::json to_json(const SizingReport& s);
nlohmann::json to_json(const ScheduleMode& m);
nlohmann::json to_json(const EquivalenceStats& e);
nlohmann::json to_json(const SimReport& r);
nlohmann::json to_json(const std::vector<SweepCell>& cells);

/// One row per cell, fixed column order.
std::string sweep_csv(const std::vector<SweepCell>& cells);

/// Side-by-side buffer comparison in the same layout as the published table.
std::string format_sizes_table(const SizingReport& tilted, const SizingReport& classical);

}  // namespace fusesim

#include "fusesim/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace fusesim {

using nlohmann::json;

json to_json(const Range& r) { return json::array({r.begin, r.end}); }

json to_json(const FusionConfig& cfg) {
    return {{"tile_rows", cfg.tile_rows},
            {"tile_cols", cfg.tile_cols},
            {"num_layers", cfg.num_layers},
            {"image_height", cfg.image_height},
            {"image_width", cfg.image_width}};
}

json to_json(const StripPlan& plan) {
    json tiles = json::array();
    for (const auto& t : plan.tiles) {
        json regions = json::array();
        for (std::size_t i = 0; i < t.regions.size(); ++i) {
            regions.push_back({{"layer", t.regions[i].layer},
                               {"rows", to_json(t.regions[i].rows)},
                               {"cols", to_json(t.regions[i].cols)},
                               {"halo_cols", to_json(t.halo_cols_needed[i])}});
        }
        tiles.push_back({{"tile", t.tile},
                         {"base_col", t.base_col},
                         {"epilogue", t.is_epilogue},
                         {"input_cols", to_json(t.input_cols)},
                         {"regions", std::move(regions)}});
    }
    return {{"strip", plan.strip},
            {"rows", to_json(plan.rows)},
            {"lost_rows", plan.lost_rows},
            {"tiles", std::move(tiles)}};
}

json to_json(const SizingReport& s) {
    return {{"kind", to_string(s.kind)},
            {"pingpong_bank_bytes", s.pingpong_bank},
            {"pingpong_pair_bytes", s.pingpong_pair},
            {"overlap_bytes", s.overlap},
            {"residual_bytes", s.residual},
            {"weight_bytes", s.weight_bytes},
            {"total_bytes", s.total_bytes}};
}

json to_json(const ScheduleMode& m) {
    json j = {{"kind", to_string(m.kind)}, {"name", m.name()}};
    if (m.kind == ScheduleKind::Classical) {
        j["classical_tile"] = m.classical_tile;
    } else if (m.kind == ScheduleKind::Tilted) {
        j["tile_rows"] = m.tile_rows;
        j["tile_cols"] = m.tile_cols;
    }
    return j;
}

namespace {

json psnr_json(double db) { return std::isinf(db) ? json("inf") : json(db); }

}  // namespace

json to_json(const EquivalenceStats& e) {
    return {{"rows", e.rows},
            {"exact_rows", e.exact_rows},
            {"exact", e.exact()},
            {"deviating_rows", e.deviating_rows},
            {"mask_applied", e.mask_applied},
            {"unmasked_deviating_rows", e.unmasked_deviating_rows},
            {"max_abs_deviation", e.max_abs_deviation},
            {"psnr_db", psnr_json(e.psnr_db)}};
}

json to_json(const SimReport& r) {
    const auto& o = r.occupancy;
    json j = {
        {"mode", to_json(r.mode)},
        {"image", {{"height", r.image_height}, {"width", r.image_width}}},
        {"num_layers", r.num_layers},
        {"upscale", r.upscale},
        {"fps", r.fps},
        {"dram",
         {{"image_bytes_read", r.dram.image_bytes_read},
          {"image_bytes_written", r.dram.image_bytes_written},
          {"image_bytes_per_frame", r.dram.image_bytes()},
          {"weight_bytes_read", r.dram.weight_bytes_read},
          {"gb_per_s", r.traffic_gbps()}}},
        {"cycles",
         {{"issue_cycles", r.cycles.issue_cycles},
          {"drain_cycles", r.cycles.drain_cycles},
          {"total_cycles", r.cycles.cycles()},
          {"active_mac_cycles", r.cycles.active_mac_cycles},
          {"utilization", r.cycles.utilization()},
          {"weight_reload_overhead_cycles", 0}}},
        {"occupancy",
         {{"peak_pingpong_bank_bytes", o.peak_pingpong_bank},
          {"peak_overlap_bytes", o.peak_overlap_bytes},
          {"peak_overlap_slabs", o.peak_overlap_slabs},
          {"peak_residual_bytes", o.peak_residual},
          {"peak_total_bytes", o.peak_total},
          {"overlap_pushes", o.overlap_pushes},
          {"overlap_pops", o.overlap_pops},
          {"tiles", o.tiles},
          {"balanced_tiles", o.balanced_tiles}}},
        {"lost_rows", r.lost_rows},
    };
    j["sizing"] = r.sizing ? to_json(*r.sizing) : json(nullptr);
    j["equivalence"] = r.equivalence ? to_json(*r.equivalence) : json(nullptr);
    return j;
}

json to_json(const std::vector<SweepCell>& cells) {
    json arr = json::array();
    for (const auto& c : cells) {
        if (c.report) {
            arr.push_back(to_json(*c.report));
        } else {
            arr.push_back({{"mode", to_json(c.mode)}, {"error", c.error}});
        }
    }
    return arr;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os << "mode,tile_rows,tile_cols,classical_tile,bytes_read,bytes_written,gb_per_s,"
          "issue_cycles,total_cycles,utilization,pingpong_pair_bytes,overlap_bytes,"
          "residual_bytes,total_sram_bytes,peak_total_bytes,deviating_rows,max_abs_deviation,"
          "error\n";
    for (const auto& c : cells) {
        os << c.mode.name() << ',' << c.mode.tile_rows << ',' << c.mode.tile_cols << ','
           << c.mode.classical_tile << ',';
        if (!c.report) {
            os << ",,,,,,,,,,,,,\"" << c.error << "\"\n";
            continue;
        }
        const auto& r = *c.report;
        char gbps[32];
        std::snprintf(gbps, sizeof gbps, "%.6f", r.traffic_gbps());
        char util[32];
        std::snprintf(util, sizeof util, "%.6f", r.cycles.utilization());
        os << r.dram.image_bytes_read << ',' << r.dram.image_bytes_written << ',' << gbps << ','
           << r.cycles.issue_cycles << ',' << r.cycles.cycles() << ',' << util << ',';
        if (r.sizing) {
            os << r.sizing->pingpong_pair << ',' << r.sizing->overlap << ',' << r.sizing->residual
               << ',' << r.sizing->total_bytes << ',';
        } else {
            os << ",,,,";
        }
        os << r.occupancy.peak_total << ',';
        if (r.equivalence) {
            os << r.equivalence->deviating_rows.size() << ',' << r.equivalence->max_abs_deviation;
        } else {
            os << ',';
        }
        os << ",\n";
    }
    return os.str();
}

std::string format_sizes_table(const SizingReport& tilted, const SizingReport& classical) {
    auto kb = [](std::int64_t bytes) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2fKB", static_cast<double>(bytes) / 1000.0);
        return std::string(buf);
    };
    auto line = [](const std::string& a, const std::string& b, const std::string& c) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-18s| %-20s| %-20s\n", a.c_str(), b.c_str(), c.c_str());
        return std::string(buf);
    };
    std::string out;
    out += line("", "Tilted Layer Fusion", "Classical Layer Fusion");
    out += line("Weight Buffer", kb(tilted.weight_bytes), kb(classical.weight_bytes));
    out += line("Ping-Pong Buffers", kb(tilted.pingpong_pair), kb(classical.pingpong_pair));
    out += line("Overlap Buffer", kb(tilted.overlap),
                classical.overlap == 0 ? "-" : kb(classical.overlap));
    out += line("Residual Buffer", kb(tilted.residual), kb(classical.residual));
    out += line("Total", kb(tilted.total_bytes), kb(classical.total_bytes));
    return out;
}

}  // namespace fusesim

// fusesim: run, compare and size the fused super-resolution accelerator model.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fusesim/buffers.hpp"
#include "fusesim/io.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/report_json.hpp"
#include "fusesim/sim.hpp"
#include "fusesim/tiling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fusesim;

namespace {

// Weight buffer size as published for the 7-layer network; only used by
// `sizes --published-weights`.
constexpr std::int64_t kPublishedWeightBytes = 42'540;

struct RunConfig {
    std::string mode = "tilted";
    int tile_rows = 60;
    int tile_cols = 8;
    int classical_tile = 60;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> image_seed;
    std::string weights;
    std::string save_weights;
    std::string input;
    int image_height = 360;
    int image_width = 640;
    std::string out_image;
    std::string report;
    double fps = 60.0;
};

void add_common(CLI::App* cmd, RunConfig& cfg, bool with_mode) {
    if (with_mode) {
        cmd->add_option("--mode", cfg.mode, "Schedule: tilted, classical or layer-by-layer")
            ->check(CLI::IsMember({"tilted", "classical", "layer-by-layer"}));
    }
    cmd->add_option("--tile-rows", cfg.tile_rows, "Tilted tile rows R")->check(CLI::PositiveNumber);
    cmd->add_option("--tile-cols", cfg.tile_cols, "Tilted tile columns C")->check(CLI::PositiveNumber);
    cmd->add_option("--classical-tile", cfg.classical_tile, "Classical square tile T")
        ->check(CLI::Range(3, 1 << 20));
    cmd->add_option("--seed", cfg.seed, "PRNG seed for generated weights");
    cmd->add_option("--image-seed", cfg.image_seed, "PRNG seed for the generated image (default: --seed)");
    cmd->add_option("--weights", cfg.weights, "FWS1 weight file (overrides --seed weights)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--save-weights", cfg.save_weights, "Write the weights used to an FWS1 file");
    auto* in = cmd->add_option("--input", cfg.input, "Input PPM/PGM image")->check(CLI::ExistingFile);
    auto* h = cmd->add_option("--image-height", cfg.image_height, "Generated image height")
                  ->check(CLI::PositiveNumber);
    auto* w = cmd->add_option("--image-width", cfg.image_width, "Generated image width")
                  ->check(CLI::PositiveNumber);
    in->excludes(h)->excludes(w);
    cmd->add_option("--out-image", cfg.out_image, "Output HR PPM path");
    cmd->add_option("--report", cfg.report, "JSON report path");
    cmd->add_option("--fps", cfg.fps, "Frame rate for GB/s figures")->check(CLI::PositiveNumber);
}

Model load_model(const RunConfig& cfg) {
    const auto shape = NetworkSpec::apbn7();
    Model m = cfg.weights.empty() ? gen_weights(cfg.seed, shape) : load_weights(cfg.weights, shape);
    if (!cfg.save_weights.empty()) {
        save_weights(cfg.save_weights, m);
    }
    return m;
}

ActivationTensor load_input(const RunConfig& cfg, const Model& m) {
    if (!cfg.input.empty()) {
        return load_image(cfg.input);
    }
    return random_image(cfg.image_seed.value_or(cfg.seed), cfg.image_height, cfg.image_width,
                        m.net.input_channels());
}

ScheduleMode mode_of(const std::string& name, const RunConfig& cfg) {
    if (name == "layer-by-layer") {
        return ScheduleMode::layer_by_layer();
    }
    if (name == "classical") {
        return ScheduleMode::classical(cfg.classical_tile);
    }
    return ScheduleMode::tilted(cfg.tile_rows, cfg.tile_cols);
}

json config_json(const RunConfig& cfg) {
    json j = {{"mode", cfg.mode},
              {"tile_rows", cfg.tile_rows},
              {"tile_cols", cfg.tile_cols},
              {"classical_tile", cfg.classical_tile},
              {"seed", cfg.seed},
              {"fps", cfg.fps}};
    j["weights"] = cfg.weights.empty() ? json(nullptr) : json(cfg.weights);
    if (cfg.input.empty()) {
        j["image"] = {{"seed", cfg.image_seed.value_or(cfg.seed)},
                      {"height", cfg.image_height},
                      {"width", cfg.image_width}};
    } else {
        j["image"] = {{"path", cfg.input}};
    }
    return j;
}

void write_json(const std::string& path, const json& j) {
    if (path.empty()) {
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

std::string suffixed(const std::string& path, const std::string& tag) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + "-" + tag + p.extension().string())).string();
}

void print_summary(const SimReport& r) {
    std::cout << r.mode.name() << ": " << r.dram.image_bytes() << " B/frame, "
              << r.traffic_gbps() << " GB/s @" << r.fps << "fps, " << r.cycles.cycles()
              << " cycles, utilization " << r.cycles.utilization();
    if (r.sizing) {
        std::cout << ", SRAM " << r.sizing->total_bytes << " B (peak " << r.occupancy.peak_total
                  << ")";
    }
    if (r.equivalence) {
        std::cout << ", deviating rows " << r.equivalence->deviating_rows.size() << " (outside mask "
                  << r.equivalence->unmasked_deviating_rows.size() << ")";
    }
    std::cout << '\n';
}

int cmd_run(const RunConfig& cfg) {
    const auto model = load_model(cfg);
    const auto image = load_input(cfg, model);
    SimOptions opts;
    opts.fps = cfg.fps;
    const auto result = run(mode_of(cfg.mode, cfg), model, image, opts);
    print_summary(result.report);
    if (!cfg.out_image.empty()) {
        save_image(cfg.out_image, result.hr_image);
    }
    json j = {{"config", config_json(cfg)}, {"report", to_json(result.report)}};
    write_json(cfg.report, j);
    const auto& eq = *result.report.equivalence;
    if (!eq.confined()) {
        std::cerr << "invariant violated: interior exactness (" << eq.unmasked_deviating_rows.size()
                  << " rows deviate outside the permitted mask)\n";
        return 2;
    }
    return 0;
}

int cmd_compare(const RunConfig& cfg, bool mode_given) {
    const auto model = load_model(cfg);
    const auto image = load_input(cfg, model);
    const auto reference = reference_forward(model.net, model.weights, image);

    std::vector<std::string> names = {"layer-by-layer", "classical", "tilted"};
    if (mode_given && cfg.mode != "layer-by-layer") {
        names = {"layer-by-layer", cfg.mode};
    }
    SimOptions opts;
    opts.fps = cfg.fps;
    opts.reference = &reference;

    std::vector<std::string> violations;
    std::map<std::string, SimReport> reports;
    json runs = json::array();
    for (const auto& name : names) {
        try {
            auto result = run(mode_of(name, cfg), model, image, opts);
            print_summary(result.report);
            if (!cfg.out_image.empty()) {
                save_image(suffixed(cfg.out_image, name), result.hr_image);
            }
            const auto& eq = *result.report.equivalence;
            if (name == "layer-by-layer" && !eq.exact()) {
                violations.push_back("layer-by-layer output differs from reference");
            }
            if (name == "tilted" && !eq.confined()) {
                violations.push_back("tilted interior exactness");
            }
            runs.push_back(to_json(result.report));
            reports.emplace(name, std::move(result.report));
        } catch (const InvariantViolation& e) {
            violations.push_back(std::string("occupancy/buffer discipline (") + name + "): " + e.what());
        }
    }
    if (!cfg.out_image.empty()) {
        save_image(suffixed(cfg.out_image, "reference"), reference);
    }
    auto bytes = [&](const char* n) { return reports.at(n).dram.image_bytes(); };
    if (reports.contains("tilted") && reports.contains("classical") &&
        bytes("tilted") > bytes("classical")) {
        violations.push_back("traffic ordering: tilted > classical");
    }
    for (const char* fused : {"tilted", "classical"}) {
        if (reports.contains(fused) && reports.contains("layer-by-layer") &&
            bytes(fused) > bytes("layer-by-layer")) {
            violations.push_back(std::string("traffic ordering: ") + fused + " > layer-by-layer");
        }
    }
    json j = {{"config", config_json(cfg)}, {"runs", runs}, {"violations", violations}};
    if (reports.contains("tilted") && reports.contains("layer-by-layer")) {
        const double reduction = 1.0 - static_cast<double>(bytes("tilted")) / bytes("layer-by-layer");
        j["dram_reduction"] = reduction;
        std::cout << "DRAM traffic reduction vs layer-by-layer: " << reduction * 100.0 << "%\n";
    }
    write_json(cfg.report, j);
    for (const auto& v : violations) {
        std::cerr << "invariant violated: " << v << '\n';
    }
    return violations.empty() ? 0 : 2;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    return out;
}

int cmd_sweep(const RunConfig& cfg, const std::string& cols, const std::string& csv) {
    const auto model = load_model(cfg);
    const auto image = load_input(cfg, model);
    std::vector<ScheduleMode> modes = {ScheduleMode::layer_by_layer(),
                                       ScheduleMode::classical(cfg.classical_tile)};
    for (int c : parse_int_list(cols)) {
        modes.push_back(ScheduleMode::tilted(cfg.tile_rows, c));
    }
    SimOptions opts;
    opts.fps = cfg.fps;
    const auto cells = sweep(modes, model, image, opts);
    int failures = 0;
    for (const auto& c : cells) {
        if (c.report) {
            print_summary(*c.report);
        } else {
            std::cerr << c.mode.name() << ": " << c.error << '\n';
            ++failures;
        }
    }
    write_json(cfg.report, {{"config", config_json(cfg)}, {"cells", to_json(cells)}});
    if (!csv.empty()) {
        std::ofstream(csv) << sweep_csv(cells);
    }
    return failures == 0 ? 0 : 2;
}

int cmd_sizes(const RunConfig& cfg, bool published_weights) {
    const auto net = NetworkSpec::apbn7();
    const auto weights = zero_weights(net);
    const std::int64_t wb = published_weights ? kPublishedWeightBytes : weight_bytes(weights);
    const FusionConfig fusion{cfg.tile_rows, cfg.tile_cols, net.num_layers()};
    const auto tilted = sizing_report(BufferConfig::tilted(fusion, net), FusionKind::Tilted, wb);
    const auto classical = sizing_report(BufferConfig::classical(cfg.classical_tile, net),
                                         FusionKind::Classical, wb);
    std::cout << format_sizes_table(tilted, classical);
    std::cout << "(weight buffer: " << weight_bytes(weights) << " B from shapes = "
              << weights.weight_count() << " i8 weights + " << weights.bias_count()
              << " i32 biases; published " << kPublishedWeightBytes << " B)\n";
    write_json(cfg.report, {{"config", config_json(cfg)},
                            {"tilted", to_json(tilted)},
                            {"classical", to_json(classical)}});
    return 0;
}

int cmd_plan(const RunConfig& cfg, int strip, bool classical) {
    json j;
    if (classical) {
        json blocks = json::array();
        for (const auto& b : plan_classical(cfg.image_height, cfg.image_width, cfg.classical_tile)) {
            blocks.push_back({{"index", b.index}, {"rows", to_json(b.rows)}, {"cols", to_json(b.cols)}});
        }
        j = {{"classical_tile", cfg.classical_tile}, {"blocks", blocks}};
    } else {
        const FusionConfig fusion{cfg.tile_rows, cfg.tile_cols, 7, cfg.image_height, cfg.image_width};
        j = {{"config", to_json(fusion)},
             {"num_strips", fusion.num_strips()},
             {"lost_row_mask", lost_row_mask(fusion)},
             {"strip", to_json(plan_strip(strip, fusion))}};
    }
    if (cfg.report.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json(cfg.report, j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tilted layer fusion accelerator simulator"};
    app.require_subcommand(1);

    RunConfig run_cfg, cmp_cfg, sweep_cfg, sizes_cfg, plan_cfg;

    auto* run_cmd = app.add_subcommand("run", "Simulate one schedule");
    add_common(run_cmd, run_cfg, true);

    auto* cmp_cmd = app.add_subcommand("compare", "Run reference and fused schedules, check invariants");
    add_common(cmp_cmd, cmp_cfg, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "Simulate a grid of schedules");
    add_common(sweep_cmd, sweep_cfg, false);
    std::string sweep_cols = "8";
    std::string sweep_csv_path;
    sweep_cmd->add_option("--cols", sweep_cols, "Comma-separated tilted tile widths");
    sweep_cmd->add_option("--csv", sweep_csv_path, "CSV output path");

    auto* sizes_cmd = app.add_subcommand("sizes", "Print on-chip buffer sizes");
    add_common(sizes_cmd, sizes_cfg, false);
    bool published_weights = false;
    sizes_cmd->add_flag("--published-weights", published_weights,
                        "Use the published 42.54 KB weight buffer instead of the shape-derived size");

    auto* plan_cmd = app.add_subcommand("plan", "Dump tile geometry as JSON");
    add_common(plan_cmd, plan_cfg, false);
    int plan_strip_index = 0;
    bool plan_classical_flag = false;
    plan_cmd->add_option("--strip", plan_strip_index, "Strip index");
    plan_cmd->add_flag("--classical", plan_classical_flag, "Dump the classical block grid instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run_cfg);
        }
        if (cmp_cmd->parsed()) {
            return cmd_compare(cmp_cfg, cmp_cmd->count("--mode") > 0);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_cfg, sweep_cols, sweep_csv_path);
        }
        if (sizes_cmd->parsed()) {
            return cmd_sizes(sizes_cfg, published_weights);
        }
        if (plan_cmd->parsed()) {
            return cmd_plan(plan_cfg, plan_strip_index, plan_classical_flag);
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

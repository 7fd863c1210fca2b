// Command-line front end: simulate a dataset, map it into an ensemble model,
// evaluate the model against ground truth, and render maps to images.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gpmap/checkpoint.hpp"
#include "gpmap/eval.hpp"
#include "gpmap/simulator.hpp"
#include "json.hpp"

namespace {

using namespace gpmap;

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

int run_simulate(const RunConfig& cfg) {
    if (cfg.world.empty()) throw std::runtime_error("simulate: no world file configured");
    const World w = read_world(cfg.world);
    fs::create_directories(cfg.output);

    const std::vector<Scan> scans =
        generate_dataset(w, cfg.waypoints, cfg.speed, cfg.scan_rate, ScanParams{},
                         cfg.noise_sigma, cfg.seed, join(cfg.output, "scans.jsonl"));
    write_grid(join(cfg.output, "gt.sdf"), ground_truth_sdf(w, cfg.grid));

    std::printf("simulate: %zu scans, seed %llu\n", scans.size(),
                static_cast<unsigned long long>(cfg.seed));
    return 0;
}

int run_map(const RunConfig& cfg, const std::string& scans_path) {
    const std::string path = scans_path.empty() ? join(cfg.output, "scans.jsonl") : scans_path;
    const std::vector<Scan> scans = read_scan_log(path, cfg.ens.scan_stride);
    if (scans.empty()) throw std::runtime_error("map: no scans in " + path);
    fs::create_directories(cfg.output);

    std::ofstream stats(join(cfg.output, "stats.csv"), std::ios::binary);
    if (!stats) throw std::runtime_error("map: cannot open stats.csv");
    stats << "scan,experts,pis_total,pis_primary,ms\n";

    Ensemble ens;
    int used = 0;
    for (size_t k = 0; k < scans.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const MeasurementBatch batch = scan_to_measurements(scans[k], cfg.ens);
        if (used == 0) {
            if (batch.size() == 0) continue;  // nothing to seed the model with yet
            ens = init_ensemble(batch, cfg.ens);
        } else {
            step(ens, batch);
        }
        ++used;
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();

        stats << k * cfg.ens.scan_stride << "," << ens.experts.size() << "," << ens.total_pis()
              << "," << ens.total_primary_pis() << "," << ms << "\n";
        if (used % cfg.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_%06d.json", used);
            save_checkpoint(join(cfg.output, name), ens);
        }
    }
    if (used == 0) throw std::runtime_error("map: every scan produced an empty batch");

    save_checkpoint(join(cfg.output, "model.json"), ens);
    std::printf("map: %d scans used, %zu experts, %d primary PIs\n", used, ens.experts.size(),
                ens.total_primary_pis());
    return 0;
}

nlohmann::json metric_json(const std::optional<double>& v) {
    if (!v.has_value()) return nullptr;
    return *v;
}

int run_eval(const RunConfig& cfg, const std::string& model_path, const std::string& gt_path) {
    const Ensemble ens =
        load_checkpoint(model_path.empty() ? join(cfg.output, "model.json") : model_path);
    const SdfGrid gt = read_grid(gt_path.empty() ? join(cfg.output, "gt.sdf") : gt_path);

    nlohmann::json report;
    auto eval_mode = [&](PredictMode m, const char* suffix) {
        const SdfGrid pred = predict_grid(ens, gt.spec, m);
        report[std::string("rmsd") + suffix] = metric_json(rmsd(pred, gt));
        report[std::string("hausdorff") + suffix] = metric_json(hausdorff(pred, gt));
    };
    if (cfg.mode == "individual" || cfg.mode == "both") eval_mode(PredictMode::individual, "");
    if (cfg.mode == "mixture") eval_mode(PredictMode::mixture, "");
    if (cfg.mode == "both") eval_mode(PredictMode::mixture, "_mixture");

    report["n_experts"] = ens.experts.size();
    report["n_pi_total"] = ens.total_pis();
    report["n_pi_primary"] = ens.total_primary_pis();

    fs::create_directories(cfg.output);
    std::ofstream out(join(cfg.output, "metrics.json"), std::ios::binary);
    if (!out) throw std::runtime_error("eval: cannot open metrics.json");
    out << report.dump(2) << '\n';
    std::cout << report.dump(2) << '\n';
    return 0;
}

int run_render(const RunConfig& cfg, const std::string& input, const std::string& image_path,
               bool overlay) {
    const std::string in = input.empty() ? join(cfg.output, "model.json") : input;
    const std::string out = image_path.empty() ? join(cfg.output, "map.ppm") : image_path;

    SdfGrid grid;
    std::vector<std::pair<Point, int>> dots;
    std::ifstream probe(in);
    if (!probe) throw std::runtime_error("render: cannot open " + in);
    if (probe.peek() == '{') {
        const Ensemble ens = load_checkpoint(in);
        const PredictMode m =
            cfg.mode == "mixture" ? PredictMode::mixture : PredictMode::individual;
        grid = predict_grid(ens, cfg.grid, m);
        if (overlay)
            for (const auto& [id, e] : ens.experts)
                for (int i = 0; i < e.primary_count; ++i) dots.emplace_back(e.gp.pis[i], id);
    } else {
        grid = read_grid(in);
    }

    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    render(grid, out, dots);
    std::printf("render: wrote %s (%dx%d)\n", out.c_str(), grid.spec.width, grid.spec.height);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online implicit-surface mapping from 2D range scans"};
    app.require_subcommand(1);

    std::string config_path, output, mode;
    uint64_t seed = 0;
    int stride = 0, checkpoint_every = 0;
    std::string scans_path, model_path, gt_path, render_input, image_path;
    bool overlay = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file (JSON)");
        sub->add_option("--output", output, "output directory");
        sub->add_option("--seed", seed, "noise seed");
        sub->add_option("--stride", stride, "use every stride-th scan")
            ->check(CLI::PositiveNumber);
        sub->add_option("--mode", mode, "prediction mode")
            ->check(CLI::IsMember({"individual", "mixture", "both"}));
        sub->add_option("--checkpoint-every", checkpoint_every,
                        "checkpoint interval in used scans")
            ->check(CLI::PositiveNumber);
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate a scan log and ground truth");
    CLI::App* map = app.add_subcommand("map", "build a model from a scan log");
    map->add_option("scans", scans_path, "scan log (default <output>/scans.jsonl)");
    CLI::App* eval = app.add_subcommand("eval", "score a model against ground truth");
    eval->add_option("model", model_path, "model checkpoint (default <output>/model.json)");
    eval->add_option("gt", gt_path, "ground-truth grid (default <output>/gt.sdf)");
    CLI::App* render = app.add_subcommand("render", "draw a grid or model as an image");
    render->add_option("input", render_input, "grid file or checkpoint");
    render->add_option("image", image_path, "output image (default <output>/map.ppm)");
    render->add_flag("--overlay", overlay, "mark primary pseudo-inputs");
    for (CLI::App* sub : {sim, map, eval, render}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--output")) cfg.output = output;
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--stride")) cfg.ens.scan_stride = stride;
        if (sub->count("--mode")) cfg.mode = mode;
        if (sub->count("--checkpoint-every")) cfg.checkpoint_every = checkpoint_every;
        validate(cfg);

        if (sub == sim) return run_simulate(cfg);
        if (sub == map) return run_map(cfg, scans_path);
        if (sub == eval) return run_eval(cfg, model_path, gt_path);
        return run_render(cfg, render_input, image_path, overlay);
    } catch (const gpmap::NumericalError& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}

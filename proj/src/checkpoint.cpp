#include "gpmap/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace gpmap {

namespace {

using nlohmann::json;

json ensemble_config_to_json(const EnsembleConfig& c) {
    return {{"sigma2", c.sigma2},
            {"t_add", c.t_add},
            {"t_del", c.t_del},
            {"min_pi_dist", c.min_pi_dist},
            {"n_min", c.n_min},
            {"n_new", c.n_new},
            {"n_max", c.n_max},
            {"kernel_R", c.kernel_R},
            {"aux_offset", c.aux_offset},
            {"scan_stride", c.scan_stride},
            {"k_per_edge", c.k_per_edge},
            {"n_secondary_per_neighbor", c.n_secondary_per_neighbor},
            {"update_margin", c.update_margin},
            {"mix_radius", c.mix_radius}};
}

// Assigns the field for one known key; false when the key is not an
// EnsembleConfig field.
bool apply_ensemble_key(EnsembleConfig& c, const std::string& key, const json& v) {
    if (key == "sigma2") c.sigma2 = v.get<double>();
    else if (key == "t_add") c.t_add = v.get<double>();
    else if (key == "t_del") c.t_del = v.get<double>();
    else if (key == "min_pi_dist") c.min_pi_dist = v.get<double>();
    else if (key == "n_min") c.n_min = v.get<int>();
    else if (key == "n_new") c.n_new = v.get<int>();
    else if (key == "n_max") c.n_max = v.get<int>();
    else if (key == "kernel_R") c.kernel_R = v.get<double>();
    else if (key == "aux_offset") c.aux_offset = v.get<double>();
    else if (key == "scan_stride") c.scan_stride = v.get<int>();
    else if (key == "k_per_edge") c.k_per_edge = v.get<int>();
    else if (key == "n_secondary_per_neighbor") c.n_secondary_per_neighbor = v.get<int>();
    else if (key == "update_margin") c.update_margin = v.get<double>();
    else if (key == "mix_radius") c.mix_radius = v.get<double>();
    else return false;
    return true;
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.origin = {j.at("x0").get<double>(), j.at("y0").get<double>()};
    g.resolution = j.at("resolution").get<double>();
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    return g;
}

json grid_to_json(const GridSpec& g) {
    return {{"x0", g.origin.x()},
            {"y0", g.origin.y()},
            {"resolution", g.resolution},
            {"width", g.width},
            {"height", g.height}};
}

}  // namespace

void validate(const RunConfig& cfg) {
    validate(cfg.ens);
    if (cfg.checkpoint_every < 1)
        throw std::invalid_argument("config: checkpoint_every must be >= 1");
    if (!(cfg.noise_sigma >= 0.0))
        throw std::invalid_argument("config: noise_sigma must be >= 0");
    if (!(cfg.speed > 0.0) || !(cfg.scan_rate > 0.0))
        throw std::invalid_argument("config: speed and scan_rate must be positive");
    if (!(cfg.grid.resolution > 0.0) || cfg.grid.width < 1 || cfg.grid.height < 1)
        throw std::invalid_argument("config: bad grid spec");
    if (cfg.mode != "individual" && cfg.mode != "mixture" && cfg.mode != "both")
        throw std::invalid_argument("config: mode must be individual, mixture or both");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_run_config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& err) {
        throw std::runtime_error("load_run_config: " + path + ": " + err.what());
    }

    RunConfig cfg;
    try {
        for (const auto& [key, v] : j.items()) {
            if (apply_ensemble_key(cfg.ens, key, v)) continue;
            if (key == "world") cfg.world = v.get<std::string>();
            else if (key == "waypoints") {
                cfg.waypoints.clear();
                for (const auto& p : v)
                    cfg.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            else if (key == "speed") cfg.speed = v.get<double>();
            else if (key == "scan_rate") cfg.scan_rate = v.get<double>();
            else if (key == "noise_sigma") cfg.noise_sigma = v.get<double>();
            else if (key == "seed") cfg.seed = v.get<uint64_t>();
            else if (key == "grid") cfg.grid = grid_from_json(v);
            else if (key == "mode") cfg.mode = v.get<std::string>();
            else if (key == "checkpoint_every") cfg.checkpoint_every = v.get<int>();
            else if (key == "output") cfg.output = v.get<std::string>();
            else throw std::runtime_error("unknown key '" + key + "'");
        }
    } catch (const std::exception& err) {
        throw std::runtime_error("load_run_config: " + path + ": " + err.what());
    }
    validate(cfg);
    return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    json j = ensemble_config_to_json(cfg.ens);
    j["world"] = cfg.world;
    json wps = json::array();
    for (const Point& p : cfg.waypoints) wps.push_back({p.x(), p.y()});
    j["waypoints"] = wps;
    j["speed"] = cfg.speed;
    j["scan_rate"] = cfg.scan_rate;
    j["noise_sigma"] = cfg.noise_sigma;
    j["seed"] = cfg.seed;
    j["grid"] = grid_to_json(cfg.grid);
    j["mode"] = cfg.mode;
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["output"] = cfg.output;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_run_config: cannot open " + path);
    out << j.dump(2) << '\n';
}

void save_checkpoint(const std::string& path, const Ensemble& ens) {
    json experts = json::array();
    for (const auto& [id, e] : ens.experts) {
        json je;
        je["id"] = id;
        json pis = json::array();
        for (const Point& p : e.gp.pis) pis.push_back({p.x(), p.y()});
        je["pis"] = pis;
        je["primary_count"] = e.primary_count;
        je["mean"] = std::vector<double>(e.gp.mean.data(), e.gp.mean.data() + e.gp.mean.size());
        std::vector<double> cov;
        cov.reserve(static_cast<size_t>(e.gp.size()) * e.gp.size());
        for (int i = 0; i < e.gp.size(); ++i)
            for (int k = 0; k < e.gp.size(); ++k) cov.push_back(e.gp.cov(i, k));
        je["cov"] = cov;
        je["secondary_origin"] = e.secondary_origin;
        experts.push_back(je);
    }

    json j;
    j["config"] = ensemble_config_to_json(ens.cfg);
    j["scan_counter"] = ens.scan_counter;
    j["experts"] = experts;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << j.dump() << '\n';
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Ensemble load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& err) {
        throw std::runtime_error("load_checkpoint: " + path + ": " + err.what());
    }

    try {
        Ensemble ens;
        for (const auto& [key, v] : j.at("config").items())
            if (!apply_ensemble_key(ens.cfg, key, v))
                throw std::runtime_error("unknown config key '" + key + "'");
        validate(ens.cfg);
        ens.scan_counter = j.at("scan_counter").get<int>();

        for (const auto& je : j.at("experts")) {
            const int id = je.at("id").get<int>();
            std::vector<Point> pis;
            for (const auto& p : je.at("pis"))
                pis.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            const int n = static_cast<int>(pis.size());

            const auto mean_v = je.at("mean").get<std::vector<double>>();
            const auto cov_v = je.at("cov").get<std::vector<double>>();
            if (static_cast<int>(mean_v.size()) != n ||
                static_cast<int>(cov_v.size()) != n * n)
                throw std::runtime_error("expert " + std::to_string(id) + ": shape mismatch");

            Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(mean_v.data(), n);
            Eigen::MatrixXd cov(n, n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) cov(i, k) = cov_v[static_cast<size_t>(i) * n + k];

            const int pc = je.at("primary_count").get<int>();
            if (pc < 1 || pc > n)
                throw std::runtime_error("expert " + std::to_string(id) + ": bad primary_count");

            SparseGP gp = make_sparse_gp(std::move(pis), std::move(mean), std::move(cov),
                                         ens.cfg.kernel(), ens.cfg.noise());
            ens.experts.emplace(
                id, make_expert(id, std::move(gp), pc,
                                je.at("secondary_origin").get<std::vector<int>>()));
            ens.next_id = std::max(ens.next_id, id + 1);
        }
        if (ens.experts.empty()) throw std::runtime_error("no experts");
        rebuild_index(ens);
        return ens;
    } catch (const std::exception& err) {
        throw std::runtime_error("load_checkpoint: " + path + ": " + err.what());
    }
}

}  // namespace gpmap

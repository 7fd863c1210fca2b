// Run configuration files and model checkpoints, both JSON. Serialization is
// key-sorted, so identical state always produces identical bytes.
#pragma once

#include <cstdint>
#include <string>

#include "gpmap/ensemble.hpp"
#include "gpmap/grid.hpp"

namespace gpmap {

struct RunConfig {
    EnsembleConfig ens;
    std::string world;
    std::vector<Point> waypoints;
    double speed = 1.0;
    double scan_rate = 10.0;
    double noise_sigma = 0.01;
    uint64_t seed = 1;
    GridSpec grid{{-5.55, -5.55}, 0.1, 111, 111};
    std::string mode = "individual";
    int checkpoint_every = 50;
    std::string output = ".";
};

// Throws std::invalid_argument for out-of-range fields or an unknown mode.
void validate(const RunConfig& cfg);

// Single flat JSON object; keys absent from the file keep their defaults,
// unknown keys are rejected.
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

void save_checkpoint(const std::string& path, const Ensemble& ens);
Ensemble load_checkpoint(const std::string& path);

}  // namespace gpmap

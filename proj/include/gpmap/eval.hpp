// Map evaluation: SDF grids predicted from an ensemble, surface-band RMSD,
// Hausdorff distance between predicted and true surface cells, and rendering.
#pragma once

#include <optional>
#include <string>

#include "gpmap/ensemble.hpp"
#include "gpmap/grid.hpp"

namespace gpmap {

enum class PredictMode { individual, mixture };

// Cells whose predicted value lies within this band count as surface.
inline constexpr double surface_band = 0.02;

SdfGrid predict_grid(const Ensemble& ens, const GridSpec& g, PredictMode mode);

// Root mean square of the true distance over predicted-surface cells, or
// nullopt when no cell falls inside the band.
std::optional<double> rmsd(const SdfGrid& pred, const SdfGrid& gt);

// Symmetric Hausdorff distance between predicted-surface cell centers and
// cell centers touched by the true surface; nullopt if either set is empty.
std::optional<double> hausdorff(const SdfGrid& pred, const SdfGrid& gt);

// Binary PPM, blue (-0.5) through white (surface band) to red (+0.5).
// Overlay points are painted one pixel each, colored by their expert id.
void render(const SdfGrid& grid, const std::string& path,
            const std::vector<std::pair<Point, int>>& overlay = {});

SdfGrid read_grid(const std::string& path);
void write_grid(const std::string& path, const SdfGrid& grid);

}  // namespace gpmap

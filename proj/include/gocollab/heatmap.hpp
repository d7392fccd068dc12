#pragma once

#include <filesystem>

#include "gocollab/collab.hpp"

namespace gocollab::collab {

// (row, col, score) CSV with exactly h*w data rows.
void write_map_csv(const std::filesystem::path& path, const ScoreGrid& map);
ScoreGrid read_map_csv(const std::filesystem::path& path);

// Binary PPM (P6) with a diverging red/blue scale: positive scores shade
// toward red, negative toward blue, zero is white. `grid` draws board lines.
void write_heatmap_ppm(const std::filesystem::path& path, const ScoreGrid& map,
                       int cell_px = 24, bool grid = false);

}  // namespace gocollab::collab

#pragma once

#include <vector>

#include "gocollab/tensor.hpp"

namespace gocollab::distill {

// A rectangular board sub-region that serves as one student net's entire
// input. `rot` counts 90-degree CCW turns applied after cropping so that the
// cell nearest the board corner lands at the crop's top-left.
struct Lattice {
    int row = 0, col = 0;  // offset of the crop on the board
    int h = 0, w = 0;
    int rot = 0;  // quarter turns CCW

    bool contains(int r, int c) const {
        return r >= row && r < row + h && c >= col && c < col + w;
    }
    bool operator==(const Lattice&) const = default;
};

enum class LatticeMode {
    Corners,  // four lattices anchored at the board corners
    Grid,     // n x n evenly spaced overlapping lattices
};

// Corners mode ignores grid_n. Grid offsets are round(k*(H-h)/(n-1)) with
// ties rounding down. Identical placements are deduplicated (keeping the
// first), so h == H collapses to a single lattice.
std::vector<Lattice> make_lattices(int board_h, int board_w, int lat_h, int lat_w,
                                   LatticeMode mode, int grid_n = 3);

// Crop the lattice region and rotate it by lattice.rot quarter turns.
Tensor crop_rotate(const Tensor& board, const Lattice& lat);

// Inverse: rotate back and place at the lattice offset; zero elsewhere.
Tensor uncrop_unrotate(const Tensor& cropped, const Lattice& lat, int board_h, int board_w);

// Board coordinate -> coordinate within the rotated crop. Returns false if
// the coordinate lies outside the lattice.
bool board_to_crop_coord(const Lattice& lat, int r, int c, int& out_r, int& out_c);

}  // namespace gocollab::distill

#include "gocollab/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "gocollab/errors.hpp"

namespace gocollab::distill {

namespace {

// round-half-down
int offset_for(int k, int span, int n) {
    if (n <= 1) return 0;
    const double x = static_cast<double>(k) * span / (n - 1);
    return static_cast<int>(std::ceil(x - 0.5));
}

// Quarter turns mapping the lattice's nearest board corner to the crop's
// top-left; ties (centered lattices) stay unrotated.
int rotation_for(int row, int col, int h, int w, int board_h, int board_w) {
    const double cr = row + (h - 1) / 2.0;
    const double cc = col + (w - 1) / 2.0;
    struct Corner {
        double r, c;
        int rot;
    };
    // top-left 0, top-right 1 (one CCW turn), bottom-right 2, bottom-left 3
    const Corner corners[4] = {
        {0.0, 0.0, 0},
        {0.0, static_cast<double>(board_w - 1), 1},
        {static_cast<double>(board_h - 1), static_cast<double>(board_w - 1), 2},
        {static_cast<double>(board_h - 1), 0.0, 3},
    };
    double best = 0.0;
    int best_rot = 0;
    bool tie = false;
    for (int i = 0; i < 4; ++i) {
        const double dr = cr - corners[i].r;
        const double dc = cc - corners[i].c;
        const double d2 = dr * dr + dc * dc;
        if (i == 0 || d2 < best - 1e-9) {
            best = d2;
            best_rot = corners[i].rot;
            tie = false;
        } else if (std::abs(d2 - best) <= 1e-9) {
            tie = true;
        }
    }
    return tie ? 0 : best_rot;
}

}  // namespace

std::vector<Lattice> make_lattices(int board_h, int board_w, int lat_h, int lat_w,
                                   LatticeMode mode, int grid_n) {
    if (lat_h <= 0 || lat_w <= 0 || lat_h > board_h || lat_w > board_w)
        throw ConfigError("lattice size does not fit the board");
    std::vector<std::pair<int, int>> offsets;
    if (mode == LatticeMode::Corners) {
        const int rs[2] = {0, board_h - lat_h};
        const int cs[2] = {0, board_w - lat_w};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) offsets.emplace_back(rs[i], cs[j]);
    } else {
        if (grid_n < 1) throw ConfigError("lattice grid must have at least one cell");
        for (int kr = 0; kr < grid_n; ++kr)
            for (int kc = 0; kc < grid_n; ++kc)
                offsets.emplace_back(offset_for(kr, board_h - lat_h, grid_n),
                                     offset_for(kc, board_w - lat_w, grid_n));
    }

    std::vector<Lattice> lats;
    for (const auto& [r, c] : offsets) {
        const bool dup = std::any_of(lats.begin(), lats.end(), [&](const Lattice& l) {
            return l.row == r && l.col == c;
        });
        if (dup) continue;
        Lattice lat;
        lat.row = r;
        lat.col = c;
        lat.h = lat_h;
        lat.w = lat_w;
        lat.rot = rotation_for(r, c, lat_h, lat_w, board_h, board_w);
        if (lat.rot % 2 == 1 && lat_h != lat_w)
            throw ConfigError("non-square lattices cannot be corner-rotated");
        lats.push_back(lat);
    }
    return lats;
}

Tensor crop_rotate(const Tensor& board, const Lattice& lat) {
    if (board.rank() != 3) throw ConfigError("crop_rotate expects a rank-3 board tensor");
    if (lat.row < 0 || lat.col < 0 || lat.row + lat.h > board.height() ||
        lat.col + lat.w > board.width())
        throw ConfigError("lattice does not fit the board");
    Tensor crop = Tensor::zeros3(lat.h, lat.w, board.channels());
    for (int r = 0; r < lat.h; ++r)
        for (int c = 0; c < lat.w; ++c)
            for (int ch = 0; ch < board.channels(); ++ch)
                crop.at(r, c, ch) = board.at(lat.row + r, lat.col + c, ch);
    return rotate_ccw(crop, lat.rot);
}

Tensor uncrop_unrotate(const Tensor& cropped, const Lattice& lat, int board_h, int board_w) {
    const Tensor unrot = rotate_ccw(cropped, (4 - lat.rot) % 4);
    if (unrot.height() != lat.h || unrot.width() != lat.w)
        throw ConfigError("uncrop_unrotate: cropped tensor does not match lattice");
    Tensor board = Tensor::zeros3(board_h, board_w, cropped.channels());
    for (int r = 0; r < lat.h; ++r)
        for (int c = 0; c < lat.w; ++c)
            for (int ch = 0; ch < board.channels(); ++ch)
                board.at(lat.row + r, lat.col + c, ch) = unrot.at(r, c, ch);
    return board;
}

bool board_to_crop_coord(const Lattice& lat, int r, int c, int& out_r, int& out_c) {
    if (!lat.contains(r, c)) return false;
    const auto rc = rotate_coord_ccw(r - lat.row, c - lat.col, lat.h, lat.w, lat.rot);
    out_r = rc[0];
    out_c = rc[1];
    return true;
}

}  // namespace gocollab::distill

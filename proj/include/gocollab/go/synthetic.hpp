#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gocollab/go/board.hpp"

namespace gocollab::go {

struct Region {
    int r0 = 0, c0 = 0, h = 0, w = 0;
    bool contains(int r, int c) const {
        return r >= r0 && r < r0 + h && c >= c0 && c < c0 + w;
    }
};

// A stone motif: all cells must match (relative to an anchor) for a hit.
struct StonePattern {
    struct CellSpec {
        int dr = 0, dc = 0;
        Cell want = Cell::Black;
    };
    std::vector<CellSpec> cells;
    double weight = 1.0;
};

// Weighted count of pattern matches whose cells all lie inside the region.
// Depends only on cells in R by construction; the ground-truth teacher for
// the region-recovery tests.
double synthetic_teacher_eval(const Tensor& board_planes, const Region& region,
                              std::span<const StonePattern> patterns);

std::function<double(const Tensor&)> make_synthetic_teacher(Region region,
                                                            std::vector<StonePattern> patterns);

// Stone-count motifs with mixed signs; responsive to any stone change in R.
std::vector<StonePattern> default_synthetic_patterns();

}  // namespace gocollab::go

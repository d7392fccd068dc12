#include "gocollab/go/synthetic.hpp"

#include "gocollab/errors.hpp"

namespace gocollab::go {

namespace {

bool cell_matches(const Tensor& planes, int r, int c, Cell want) {
    const bool black = planes.at(r, c, 0) != 0.0;
    const bool white = planes.at(r, c, 1) != 0.0;
    switch (want) {
        case Cell::Black: return black;
        case Cell::White: return white;
        case Cell::Empty: return !black && !white;
    }
    return false;
}

}  // namespace

double synthetic_teacher_eval(const Tensor& board_planes, const Region& region,
                              std::span<const StonePattern> patterns) {
    if (board_planes.rank() != 3 || board_planes.channels() != 2)
        throw ConfigError("synthetic teacher expects an (H, W, 2) board tensor");
    if (region.r0 < 0 || region.c0 < 0 || region.r0 + region.h > board_planes.height() ||
        region.c0 + region.w > board_planes.width())
        throw ConfigError("synthetic teacher region does not fit the board");

    double total = 0.0;
    for (const StonePattern& p : patterns) {
        for (int r = region.r0; r < region.r0 + region.h; ++r) {
            for (int c = region.c0; c < region.c0 + region.w; ++c) {
                bool hit = true;
                for (const auto& cs : p.cells) {
                    const int rr = r + cs.dr, cc = c + cs.dc;
                    if (!region.contains(rr, cc) || !cell_matches(board_planes, rr, cc, cs.want)) {
                        hit = false;
                        break;
                    }
                }
                if (hit) total += p.weight;
            }
        }
    }
    return total;
}

std::function<double(const Tensor&)> make_synthetic_teacher(Region region,
                                                            std::vector<StonePattern> patterns) {
    return [region, patterns = std::move(patterns)](const Tensor& board) {
        return synthetic_teacher_eval(board, region, patterns);
    };
}

std::vector<StonePattern> default_synthetic_patterns() {
    std::vector<StonePattern> ps;
    ps.push_back({{{0, 0, Cell::Black}}, 0.6});
    ps.push_back({{{0, 0, Cell::White}}, -0.4});
    ps.push_back({{{0, 0, Cell::Black}, {0, 1, Cell::Black}}, 0.5});   // horizontal pair
    ps.push_back({{{0, 0, Cell::White}, {1, 0, Cell::White}}, -0.3});  // vertical pair
    return ps;
}

}  // namespace gocollab::go

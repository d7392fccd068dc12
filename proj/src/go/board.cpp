#include "gocollab/go/board.hpp"

#include <array>

#include "gocollab/errors.hpp"

namespace gocollab::go {

namespace {

constexpr std::array<std::array<int, 2>, 4> kDirs{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

// Flood-fills the group at (r, c); returns its stones and liberty count.
struct Group {
    std::vector<int> stones;  // flat indices
    int liberties = 0;
};

Group find_group(const GameState& s, int r, int c) {
    Group g;
    const Cell color = s.at(r, c);
    if (color == Cell::Empty) return g;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(s.h) * s.w, 0);
    std::vector<int> stack{r * s.w + c};
    seen[static_cast<std::size_t>(r * s.w + c)] = 1;
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        g.stones.push_back(idx);
        const int cr = idx / s.w, cc = idx % s.w;
        for (const auto& d : kDirs) {
            const int nr = cr + d[0], nc = cc + d[1];
            if (!s.on_board(nr, nc)) continue;
            const int nidx = nr * s.w + nc;
            if (seen[static_cast<std::size_t>(nidx)]) continue;
            const Cell ncell = s.at(nr, nc);
            if (ncell == Cell::Empty) {
                seen[static_cast<std::size_t>(nidx)] = 1;
                ++g.liberties;
            } else if (ncell == color) {
                seen[static_cast<std::size_t>(nidx)] = 1;
                stack.push_back(nidx);
            }
        }
    }
    return g;
}

// Places the stone and removes captured opponent groups. Returns captures.
int place_and_capture(GameState& s, int r, int c, Cell color, std::vector<int>* captured) {
    s.at(r, c) = color;
    int captures = 0;
    const Cell opp = opponent(color);
    for (const auto& d : kDirs) {
        const int nr = r + d[0], nc = c + d[1];
        if (!s.on_board(nr, nc) || s.at(nr, nc) != opp) continue;
        const Group g = find_group(s, nr, nc);
        if (g.liberties == 0) {
            for (int idx : g.stones) {
                s.board[static_cast<std::size_t>(idx)] = Cell::Empty;
                if (captured) captured->push_back(idx);
            }
            captures += static_cast<int>(g.stones.size());
        }
    }
    return captures;
}

}  // namespace

GameState GameState::empty(int h, int w) {
    GameState s;
    s.h = h;
    s.w = w;
    s.board.assign(static_cast<std::size_t>(h) * w, Cell::Empty);
    return s;
}

int group_liberties(const GameState& s, int r, int c) {
    if (s.at(r, c) == Cell::Empty) return 0;
    return find_group(s, r, c).liberties;
}

bool is_legal(const GameState& s, Move m, std::string* reason) {
    auto fail = [&](const char* why) {
        if (reason) *reason = why;
        return false;
    };
    if (s.game_over()) return fail("game is over");
    if (m.is_pass()) return true;
    if (!s.on_board(m.r, m.c)) return fail("off the board");
    if (s.at(m.r, m.c) != Cell::Empty) return fail("point is occupied");
    if (s.ko && *s.ko == m.r * s.w + m.c) return fail("simple-ko recapture");

    // fast path: any empty orthogonal neighbour means the stone has a liberty
    bool has_empty_neighbour = false;
    for (const auto& d : kDirs) {
        const int nr = m.r + d[0], nc = m.c + d[1];
        if (s.on_board(nr, nc) && s.at(nr, nc) == Cell::Empty) has_empty_neighbour = true;
    }
    if (has_empty_neighbour) return true;

    GameState tmp = s;
    place_and_capture(tmp, m.r, m.c, s.to_move, nullptr);
    if (find_group(tmp, m.r, m.c).liberties == 0) return fail("suicide");
    return true;
}

std::vector<Move> legal_moves(const GameState& s) {
    std::vector<Move> moves;
    if (s.game_over()) return moves;
    for (int r = 0; r < s.h; ++r)
        for (int c = 0; c < s.w; ++c)
            if (is_legal(s, Move{r, c})) moves.push_back(Move{r, c});
    moves.push_back(Move::pass());
    return moves;
}

int capture_count(const GameState& s, Move m) {
    if (m.is_pass() || !is_legal(s, m)) return 0;
    GameState tmp = s;
    return place_and_capture(tmp, m.r, m.c, s.to_move, nullptr);
}

GameState apply_move(const GameState& s, Move m) {
    std::string reason;
    if (!is_legal(s, m, &reason))
        throw IllegalMove("illegal move at (" + std::to_string(m.r) + "," + std::to_string(m.c) +
                          "): " + reason);
    GameState next = s;
    next.move_count = s.move_count + 1;
    next.to_move = opponent(s.to_move);
    next.ko.reset();
    if (m.is_pass()) {
        next.consecutive_passes = s.consecutive_passes + 1;
        return next;
    }
    next.consecutive_passes = 0;
    std::vector<int> captured;
    place_and_capture(next, m.r, m.c, s.to_move, &captured);
    // simple ko: a lone stone capturing exactly one stone leaves that point
    // forbidden for the immediate recapture
    if (captured.size() == 1) {
        const Group own = find_group(next, m.r, m.c);
        if (own.stones.size() == 1 && own.liberties == 1) next.ko = captured.front();
    }
    return next;
}

double area_score(const GameState& s) {
    int black = 0, white = 0;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(s.h) * s.w, 0);
    for (int r = 0; r < s.h; ++r) {
        for (int c = 0; c < s.w; ++c) {
            const Cell cell = s.at(r, c);
            if (cell == Cell::Black) {
                ++black;
                continue;
            }
            if (cell == Cell::White) {
                ++white;
                continue;
            }
            const int idx = r * s.w + c;
            if (seen[static_cast<std::size_t>(idx)]) continue;
            // flood-fill the empty region and look at its border colors
            std::vector<int> region, stack{idx};
            seen[static_cast<std::size_t>(idx)] = 1;
            bool touches_black = false, touches_white = false;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                region.push_back(cur);
                const int cr = cur / s.w, cc = cur % s.w;
                for (const auto& d : kDirs) {
                    const int nr = cr + d[0], nc = cc + d[1];
                    if (!s.on_board(nr, nc)) continue;
                    const Cell ncell = s.at(nr, nc);
                    if (ncell == Cell::Empty) {
                        const int nidx = nr * s.w + nc;
                        if (!seen[static_cast<std::size_t>(nidx)]) {
                            seen[static_cast<std::size_t>(nidx)] = 1;
                            stack.push_back(nidx);
                        }
                    } else if (ncell == Cell::Black) {
                        touches_black = true;
                    } else {
                        touches_white = true;
                    }
                }
            }
            if (touches_black && !touches_white) black += static_cast<int>(region.size());
            if (touches_white && !touches_black) white += static_cast<int>(region.size());
        }
    }
    const double komi = 0.5;
    return static_cast<double>(black) - static_cast<double>(white) - komi;
}

int score_outcome(const GameState& s) { return area_score(s) > 0.0 ? 1 : -1; }

Tensor encode_state(const GameState& s) {
    Tensor t = Tensor::zeros3(s.h, s.w, 2);
    for (int r = 0; r < s.h; ++r)
        for (int c = 0; c < s.w; ++c) {
            if (s.at(r, c) == Cell::Black) t.at(r, c, 0) = 1.0;
            if (s.at(r, c) == Cell::White) t.at(r, c, 1) = 1.0;
        }
    return t;
}

std::vector<Cell> decode_board(const Tensor& planes) {
    if (planes.rank() != 3 || planes.channels() != 2)
        throw ConfigError("decode_board expects an (H, W, 2) tensor");
    std::vector<Cell> cells(static_cast<std::size_t>(planes.height()) * planes.width(),
                            Cell::Empty);
    for (int r = 0; r < planes.height(); ++r)
        for (int c = 0; c < planes.width(); ++c) {
            if (planes.at(r, c, 0) != 0.0) cells[static_cast<std::size_t>(r) * planes.width() + c] = Cell::Black;
            if (planes.at(r, c, 1) != 0.0) cells[static_cast<std::size_t>(r) * planes.width() + c] = Cell::White;
        }
    return cells;
}

}  // namespace gocollab::go

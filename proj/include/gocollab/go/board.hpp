#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gocollab/tensor.hpp"

namespace gocollab::go {

enum class Cell : std::uint8_t { Empty = 0, Black = 1, White = 2 };

inline Cell opponent(Cell c) { return c == Cell::Black ? Cell::White : Cell::Black; }

struct Move {
    int r = -1, c = -1;
    bool is_pass() const { return r < 0; }
    static Move pass() { return Move{-1, -1}; }
    bool operator==(const Move&) const = default;
};

// Positional simple-ko Go: suicide forbidden, immediate single-stone ko
// recapture forbidden, two consecutive passes end the game, area scoring.
struct GameState {
    int h = 9, w = 9;
    std::vector<Cell> board;
    Cell to_move = Cell::Black;
    std::optional<int> ko;  // flat index of the forbidden recapture point
    int move_count = 0;
    int consecutive_passes = 0;

    static GameState empty(int h, int w);

    Cell at(int r, int c) const { return board[static_cast<std::size_t>(r) * w + c]; }
    Cell& at(int r, int c) { return board[static_cast<std::size_t>(r) * w + c]; }
    bool on_board(int r, int c) const { return r >= 0 && r < h && c >= 0 && c < w; }
    bool game_over() const { return consecutive_passes >= 2; }
};

bool is_legal(const GameState& s, Move m, std::string* reason = nullptr);

std::vector<Move> legal_moves(const GameState& s);  // includes pass

// Throws IllegalMove (with the reason) on illegal input.
GameState apply_move(const GameState& s, Move m);

// Stones captured if `m` were played now (0 for pass/illegal placements).
int capture_count(const GameState& s, Move m);

// Area score from black's perspective, with a half-point komi to white so
// the outcome is never a draw.
double area_score(const GameState& s);
int score_outcome(const GameState& s);  // +1 black win, -1 white win

// Liberties of the group containing (r, c); 0 for empty cells.
int group_liberties(const GameState& s, int r, int c);

// (H, W, 2) indicator planes: channel 0 black stones, channel 1 white stones.
Tensor encode_state(const GameState& s);

// Stones from an encoded tensor; inverse of encode_state up to to_move.
std::vector<Cell> decode_board(const Tensor& planes);

}  // namespace gocollab::go

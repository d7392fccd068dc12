#pragma once

#include <filesystem>

#include "gocollab/go/board.hpp"
#include "gocollab/nn/train.hpp"
#include "gocollab/rng.hpp"

namespace gocollab::go {

struct GameRecord {
    int h = 9, w = 9;
    std::vector<Move> moves;
    std::vector<GameState> states;  // state after each move
    int outcome = 0;                // +1 black win, -1 white win

    // rebuilds the state sequence from the moves; used after loading
    void replay();
};

enum class Policy {
    RandomLegal,    // uniform over legal non-eye-filling moves; passes when none remain
    GreedyCapture,  // 1-ply largest immediate capture, random among ties
};

Policy policy_from_string(const std::string& name);

// Deterministic given (seed, n_games): each game draws from its own stream.
// Games end after two passes or max_moves, whichever comes first, and every
// position is labeled with the final outcome.
std::vector<GameRecord> selfplay_generate(int n_games, Policy policy, std::uint64_t seed,
                                          int h = 9, int w = 9, int max_moves = 0);

// One training sample per position (the state after each move), value label
// from black's perspective. `cap` > 0 subsamples deterministically.
std::vector<nn::Sample> dataset_from_records(const std::vector<GameRecord>& records,
                                             int cap = 0, std::uint64_t seed = 1);

// JSON-lines, one game per line: {"h":..,"w":..,"moves":[[r,c],...],"outcome":1}
void save_games_jsonl(const std::filesystem::path& path, const std::vector<GameRecord>& records);
std::vector<GameRecord> load_games_jsonl(const std::filesystem::path& path);

// JSON-lines, one sample per line: {"board": [[0|1|2,...],...], "value": v}
void save_dataset_jsonl(const std::filesystem::path& path, const std::vector<nn::Sample>& samples);
std::vector<nn::Sample> load_dataset_jsonl(const std::filesystem::path& path);

// First board of a JSON-lines board file (the `explain` input format).
Tensor load_board_jsonl(const std::filesystem::path& path);

}  // namespace gocollab::go

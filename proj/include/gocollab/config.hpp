#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gocollab {

// Every experiment knob in one place. Parsed from a `key = value` file
// (# comments allowed), overridable per flag; a canonical snapshot is written
// into each output directory so runs stay reproducible.
struct RunConfig {
    // board / lattice geometry
    int board_size = 9;
    int coarse_lattice = 7;  // corner lattices
    int fine_lattice = 5;    // grid lattices
    int fine_grid = 3;       // n x n

    // networks
    int teacher_channels = 32;
    int teacher_blocks = 4;
    bool teacher_sigmoid = true;
    int student_channels = 16;
    int student_blocks = 2;
    int gate_channels = 16;
    int gate_blocks = 2;

    // self-play
    int selfplay_games = 500;
    std::string selfplay_policy = "random";
    int selfplay_max_moves = 0;  // 0 -> 4 * board area

    // training
    int teacher_epochs = 6;
    double teacher_lr = 0.005;
    int teacher_sample_cap = 3000;
    int student_epochs = 10;
    double student_lr = 0.005;
    int student_board_cap = 1500;
    int gate_epochs = 20;
    double gate_lr = 0.002;
    int gate_pair_cap = 1200;
    double gate_heldout_frac = 0.2;
    double momentum = 0.9;
    int decay_every = 4;
    double decay_factor = 0.5;

    // explanation
    std::vector<int> collab_layers = {1, 3, 5, 7};
    double activation_eps = 1e-6;

    std::uint64_t seed = 7;

    int selfplay_move_cap() const {
        return selfplay_max_moves > 0 ? selfplay_max_moves : 4 * board_size * board_size;
    }

    void validate() const;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// Canonical serialization: fixed key order, no timestamps, byte-stable.
std::string config_to_text(const RunConfig& cfg);
void write_config_snapshot(const std::filesystem::path& out_dir, const RunConfig& cfg);

}  // namespace gocollab

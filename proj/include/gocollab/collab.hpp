#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gocollab/contribution.hpp"
#include "gocollab/lattice.hpp"
#include "gocollab/nn/net.hpp"

namespace gocollab::collab {

// One explained move: the board before, the board after (stone placed,
// captures resolved) and the coordinate of the new stone.
struct MoveCase {
    Tensor pre_board;
    Tensor post_board;
    int target_r = 0, target_c = 0;

    void validate() const;  // post must differ from pre at the target
};

// Signed per-position collaboration scores over a board or crop.
struct ScoreGrid {
    int h = 0, w = 0;
    std::vector<double> v;

    static ScoreGrid zeros(int h, int w) { return {h, w, std::vector<double>(static_cast<std::size_t>(h) * w, 0.0)}; }
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    double abs_sum() const;
    double max_abs() const;
};

struct CollabMap {
    ScoreGrid values;
    // (network id, conv ordinals fused) for each constituent pass
    std::vector<std::pair<std::string, std::vector<int>>> provenance;
    std::optional<distill::Lattice> lattice;  // set for student (crop-frame) maps
    bool all_zero = false;                    // set by normalize_map on zero maps
};

inline constexpr double kActivationEps = 1e-6;

// Masks a contribution map by the move's relative effect on the layer's
// activations:
//   masked_i = C_i * |o_i - o_bfr_i| / o_i   when o_i > eps
//   masked_i = 0                             otherwise
// so entries vanish exactly when o_i <= eps, o_i == o_bfr_i, or C_i == 0.
Tensor collab_mask(const Tensor& c_at_layer, const Tensor& o, const Tensor& o_bfr,
                   double eps = kActivationEps);

// Contribution at the given conv layer (computed on the post-move trace),
// masked by the pre/post activation change, then propagated to the input.
// The returned grid sums the input map over channels. `conv_ordinal` is
// 1-based among conv layers.
CollabMap collab_map_for_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                               const MoveCase& mcase, int conv_ordinal,
                               double eps = kActivationEps);

// Sum of collab_map_for_layer over several conv layers of one network.
CollabMap network_collab_map(const nn::NetworkSpec& net, const nn::Parameters& params,
                             const MoveCase& mcase, std::span<const int> conv_ordinals,
                             const std::string& net_id, double eps = kActivationEps);

// The configured fusion layers (1,3,5,7 by default) clipped to the conv
// layers the network actually has.
std::vector<int> clip_conv_ordinals(const nn::NetworkSpec& net, std::span<const int> ordinals);

// L1 normalization: sum of |values| becomes 1; signs and ratios preserved.
// An all-zero map is returned unchanged with `all_zero` set.
CollabMap normalize_map(CollabMap m);

// Normalizes the three maps, places the student maps back onto the board at
// their lattice offsets (zero elsewhere) and sums.
CollabMap fuse_maps(const CollabMap& value_map, const CollabMap& coarse_student_map,
                    const CollabMap& fine_student_map, int board_h, int board_w);

}  // namespace gocollab::collab

#include "gocollab/collab.hpp"

#include <cmath>

#include "gocollab/errors.hpp"

namespace gocollab::collab {

void MoveCase::validate() const {
    if (!pre_board.same_shape(post_board))
        throw ConfigError("move case: pre/post board shapes differ");
    if (pre_board.rank() != 3) throw ConfigError("move case: boards must be rank-3");
    if (target_r < 0 || target_r >= pre_board.height() || target_c < 0 ||
        target_c >= pre_board.width())
        throw ConfigError("move case: target coordinate off the board");
    bool differs = false;
    for (int ch = 0; ch < pre_board.channels(); ++ch)
        if (pre_board.at(target_r, target_c, ch) != post_board.at(target_r, target_c, ch))
            differs = true;
    if (!differs) throw ConfigError("move case: post board does not differ at the target");
}

double ScoreGrid::abs_sum() const {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double ScoreGrid::max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Tensor collab_mask(const Tensor& c_at_layer, const Tensor& o, const Tensor& o_bfr, double eps) {
    if (!c_at_layer.same_shape(o) || !o.same_shape(o_bfr))
        throw ConfigError("collab_mask: shape mismatch");
    Tensor out = c_at_layer;
    double* mp = out.data();
    const double* op = o.data();
    const double* bp = o_bfr.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (op[i] > eps)
            mp[i] *= std::abs(op[i] - bp[i]) / op[i];
        else
            mp[i] = 0.0;
    }
    return out;
}

namespace {

ScoreGrid sum_channels(const Tensor& t) {
    ScoreGrid g = ScoreGrid::zeros(t.height(), t.width());
    for (int r = 0; r < t.height(); ++r)
        for (int c = 0; c < t.width(); ++c) {
            double s = 0.0;
            for (int ch = 0; ch < t.channels(); ++ch) s += t.at(r, c, ch);
            g.at(r, c) = s;
        }
    return g;
}

}  // namespace

CollabMap collab_map_for_layer(const nn::NetworkSpec& net, const nn::Parameters& params,
                               const MoveCase& mcase, int conv_ordinal, double eps) {
    mcase.validate();
    const int conv_layer = net.conv_ordinal_to_layer(conv_ordinal);

    const nn::ForwardTrace post = forward(net, params, mcase.post_board);
    const nn::ForwardTrace pre = forward(net, params, mcase.pre_board);

    // masking attaches at the fused activation boundary of the conv layer
    const nn::FoldedNetwork fn = fold_network(net, params);
    const int boundary = fn.boundary_for(conv_layer);

    contrib::ContributionMap c_at =
        contrib::propagate_to_layer(net, params, post, boundary);
    contrib::ContributionMap masked;
    masked.layer = boundary;
    masked.values = collab_mask(c_at.values, post.x(boundary), pre.x(boundary), eps);

    contrib::ContributionMap at_input =
        contrib::propagate_map_to_layer(net, params, post, std::move(masked), 0);

    CollabMap out;
    out.values = sum_channels(at_input.values);
    out.provenance.push_back({"", {conv_ordinal}});
    return out;
}

CollabMap network_collab_map(const nn::NetworkSpec& net, const nn::Parameters& params,
                             const MoveCase& mcase, std::span<const int> conv_ordinals,
                             const std::string& net_id, double eps) {
    if (conv_ordinals.empty()) throw ConfigError("network_collab_map: no layers given");
    CollabMap out;
    out.values = ScoreGrid::zeros(mcase.pre_board.height(), mcase.pre_board.width());
    std::vector<int> fused;
    for (int ordinal : conv_ordinals) {
        CollabMap layer_map = collab_map_for_layer(net, params, mcase, ordinal, eps);
        for (std::size_t i = 0; i < out.values.v.size(); ++i)
            out.values.v[i] += layer_map.values.v[i];
        fused.push_back(ordinal);
    }
    out.provenance.push_back({net_id, fused});
    return out;
}

std::vector<int> clip_conv_ordinals(const nn::NetworkSpec& net, std::span<const int> ordinals) {
    const int n = net.conv_count();
    std::vector<int> out;
    for (int o : ordinals)
        if (o >= 1 && o <= n) out.push_back(o);
    if (out.empty()) throw ConfigError("no usable conv layers for collaboration fusion");
    return out;
}

CollabMap normalize_map(CollabMap m) {
    const double total = m.values.abs_sum();
    if (total == 0.0) {
        m.all_zero = true;
        return m;
    }
    for (double& x : m.values.v) x /= total;
    m.all_zero = false;
    return m;
}

namespace {

// place a crop-frame grid back onto the board through its lattice
ScoreGrid place_on_board(const ScoreGrid& crop, const distill::Lattice& lat, int bh, int bw) {
    Tensor t = Tensor::zeros3(crop.h, crop.w, 1);
    for (int r = 0; r < crop.h; ++r)
        for (int c = 0; c < crop.w; ++c) t.at(r, c, 0) = crop.at(r, c);
    const Tensor placed = distill::uncrop_unrotate(t, lat, bh, bw);
    ScoreGrid g = ScoreGrid::zeros(bh, bw);
    for (int r = 0; r < bh; ++r)
        for (int c = 0; c < bw; ++c) g.at(r, c) = placed.at(r, c, 0);
    return g;
}

}  // namespace

CollabMap fuse_maps(const CollabMap& value_map, const CollabMap& coarse_student_map,
                    const CollabMap& fine_student_map, int board_h, int board_w) {
    if (value_map.values.h != board_h || value_map.values.w != board_w)
        throw ConfigError("fuse_maps: value map does not match the board");

    CollabMap fused;
    fused.values = ScoreGrid::zeros(board_h, board_w);
    auto add_normalized = [&](const CollabMap& m, bool student) {
        CollabMap n = normalize_map(m);
        ScoreGrid grid;
        if (student) {
            if (!n.lattice.has_value())
                throw ConfigError("fuse_maps: student map is missing its lattice");
            const distill::Lattice& lat = *n.lattice;
            if (lat.row + lat.h > board_h || lat.col + lat.w > board_w)
                throw ConfigError("fuse_maps: lattice geometry inconsistent with board");
            grid = place_on_board(n.values, lat, board_h, board_w);
        } else {
            grid = n.values;
        }
        for (std::size_t i = 0; i < fused.values.v.size(); ++i) fused.values.v[i] += grid.v[i];
        for (const auto& p : n.provenance) fused.provenance.push_back(p);
    };
    add_normalized(value_map, false);
    add_normalized(coarse_student_map, true);
    add_normalized(fine_student_map, true);
    return fused;
}

}  // namespace gocollab::collab

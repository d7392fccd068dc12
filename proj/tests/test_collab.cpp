#include <doctest.h>

#include <array>
#include <cmath>

#include "gocollab/collab.hpp"
#include "gocollab/errors.hpp"

using namespace gocollab;
using nn::LayerSpec;
using nn::NetworkSpec;

namespace {

Tensor vec(const std::vector<double>& vals) {
    Tensor t = Tensor::zeros1(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) t.flat()[i] = vals[i];
    return t;
}

// single 3x3 conv + global pool + fc head on a small board
struct ConvNet {
    NetworkSpec net;
    nn::Parameters params;
};

ConvNet single_conv_net(int board, int channels, Rng& rng, bool symmetric_lr = false) {
    NetworkSpec net;
    net.input_h = board;
    net.input_w = board;
    net.input_c = 2;
    net.layers.push_back(LayerSpec::conv(3, channels));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::avgpool(board));
    net.layers.push_back(LayerSpec::fc(1));
    net.scalar_output = true;
    ConvNet cn;
    cn.net = net;
    cn.params = nn::init_params(net, rng);
    for (auto& lp : cn.params.layers)
        if (!lp.weight.empty())
            for (double& v : lp.weight.flat()) v = rng.uniform(0.05, 0.6);
    if (symmetric_lr) {
        Tensor& w = cn.params.layers[0].weight;  // (3,3,2,ch)
        for (int kr = 0; kr < 3; ++kr)
            for (int ci = 0; ci < 2; ++ci)
                for (int co = 0; co < channels; ++co) {
                    const double v = w.at4(kr, 0, ci, co);
                    w.at4(kr, 2, ci, co) = v;  // mirror kernel columns
                }
    }
    return cn;
}

collab::MoveCase stone_case(int board, int r, int c, const std::vector<std::array<int, 3>>& stones) {
    collab::MoveCase mc;
    mc.pre_board = Tensor::zeros3(board, board, 2);
    for (const auto& [sr, sc, ch] : stones) mc.pre_board.at(sr, sc, ch) = 1.0;
    mc.post_board = mc.pre_board;
    mc.post_board.at(r, c, 0) = 1.0;  // black stone placed
    mc.target_r = r;
    mc.target_c = c;
    return mc;
}

}  // namespace

TEST_CASE("move cases must differ from the pre board at the target") {
    collab::MoveCase mc;
    mc.pre_board = Tensor::zeros3(5, 5, 2);
    mc.post_board = mc.pre_board;
    mc.target_r = 2;
    mc.target_c = 2;
    CHECK_THROWS_AS(mc.validate(), ConfigError);  // nothing placed
    mc.post_board.at(2, 2, 0) = 1.0;
    CHECK_NOTHROW(mc.validate());
    mc.target_r = 9;
    CHECK_THROWS_AS(mc.validate(), ConfigError);  // off the board
}

TEST_CASE("mask: direct evaluation, negative and unchanged activations") {
    const Tensor m1 = collab::collab_mask(vec({0.4}), vec({2.0}), vec({1.0}));
    CHECK(m1.at(0) == doctest::Approx(0.2));
    const Tensor m2 = collab::collab_mask(vec({0.4}), vec({-1.0}), vec({1.0}));
    CHECK(m2.at(0) == 0.0);
    const Tensor m3 = collab::collab_mask(vec({0.4}), vec({2.0}), vec({2.0}));
    CHECK(m3.at(0) == 0.0);
}

TEST_CASE("mask nullity set and sign preservation on randomized triples") {
    Rng rng(50);
    const double eps = collab::kActivationEps;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + rng.below_int(8);
        Tensor c = Tensor::zeros1(n), o = Tensor::zeros1(n), o_bfr = Tensor::zeros1(n);
        for (int i = 0; i < n; ++i) {
            const double roll = rng.uniform();
            c.at(i) = roll < 0.2 ? 0.0 : rng.uniform(-1.0, 1.0);
            if (roll < 0.4)
                o.at(i) = rng.uniform(-1.0, eps);  // at or below the floor
            else
                o.at(i) = rng.uniform(eps * 2, 2.0);
            o_bfr.at(i) = rng.uniform() < 0.3 ? o.at(i) : rng.uniform(-1.0, 2.0);
        }
        const Tensor masked = collab::collab_mask(c, o, o_bfr, eps);
        for (int i = 0; i < n; ++i) {
            const bool should_be_zero = o.at(i) <= eps || o.at(i) == o_bfr.at(i) || c.at(i) == 0.0;
            if (should_be_zero) {
                CHECK(masked.at(i) == 0.0);
            } else {
                CHECK(masked.at(i) != 0.0);
                CHECK(std::signbit(masked.at(i)) == std::signbit(c.at(i)));
            }
        }
    }
}

TEST_CASE("unchanged activations at the masking layer give a zero map") {
    Rng rng(51);
    ConvNet cn = single_conv_net(5, 3, rng);
    // a move whose stone is the only change, with the masking layer forced to
    // see identical activations by zeroing the kernel taps that reach it
    collab::MoveCase mc = stone_case(5, 2, 2, {{0, 0, 1}});
    // zero all weights -> conv output identical pre/post (all equal to bias)
    cn.params.layers[0].weight.fill(0.0);
    cn.params.layers[0].bias.fill(0.5);
    const auto map = collab::collab_map_for_layer(cn.net, cn.params, mc, 1);
    CHECK(map.values.abs_sum() == 0.0);
}

TEST_CASE("single conv layer map matches the hand-computed rule") {
    // 3x3 board, one input stone plus the move; one output channel whose
    // kernel is all ones; no bias. Work the two backward steps by hand.
    NetworkSpec net;
    net.input_h = 3;
    net.input_w = 3;
    net.input_c = 2;
    net.layers.push_back(LayerSpec::conv(3, 1));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::avgpool(3));
    net.layers.push_back(LayerSpec::fc(1));
    net.scalar_output = true;
    Rng rng(52);
    nn::Parameters params = nn::init_params(net, rng);
    params.layers[0].weight.fill(1.0);
    params.layers[0].bias.fill(0.0);
    params.layers[3].weight.at2(0, 0) = 1.0;
    params.layers[3].bias.at(0) = 0.0;

    collab::MoveCase mc = stone_case(3, 1, 1, {{0, 0, 0}});

    const auto map = collab::collab_map_for_layer(net, params, mc, 1);

    // forward post: conv output o(r,c) = number of stones in the 3x3 patch
    // around (r,c); the two stones at (0,0) and (1,1) are inside every patch
    // that covers them. Pre-move activations subtract the (1,1) stone.
    const auto post = forward(net, params, mc.post_board);
    const auto pre = forward(net, params, mc.pre_board);
    const Tensor& o = post.x(1);
    const Tensor& o_bfr = pre.x(1);

    // contribution at the conv output: the fc passes 1 to the pooled value
    // and the average pool splits it equally, so C_o(r,c) = 1/9 everywhere
    // (all o > 0 here)
    Tensor expected = Tensor::zeros3(3, 3, 2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const double c_masked =
                (1.0 / 9.0) * std::abs(o.at(r, c, 0) - o_bfr.at(r, c, 0)) / o.at(r, c, 0);
            // distribute over the stones inside the patch, each x_j w_j = 1
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int ir = r + dr, ic = c + dc;
                    if (ir < 0 || ir >= 3 || ic < 0 || ic >= 3) continue;
                    for (int ch = 0; ch < 2; ++ch)
                        if (mc.post_board.at(ir, ic, ch) == 1.0)
                            expected.at(ir, ic, ch) += c_masked * 1.0 / o.at(r, c, 0);
                }
        }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const double want = expected.at(r, c, 0) + expected.at(r, c, 1);
            CHECK(map.values.at(r, c) == doctest::Approx(want).epsilon(1e-10));
        }
}

TEST_CASE("mirror-symmetric net and board give a mirror-symmetric map") {
    Rng rng(53);
    ConvNet cn = single_conv_net(5, 2, rng, /*symmetric_lr=*/true);
    // board symmetric about the center column, move on the axis
    collab::MoveCase mc = stone_case(5, 2, 2, {{1, 0, 1}, {1, 4, 1}, {3, 1, 0}, {3, 3, 0}});
    const auto map = collab::network_collab_map(cn.net, cn.params, mc, std::vector<int>{1}, "t");
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            CHECK(map.values.at(r, c) == doctest::Approx(map.values.at(r, 4 - c)).epsilon(1e-10));
}

TEST_CASE("locality: positions beyond the changed receptive region get zero") {
    Rng rng(54);
    ConvNet cn = single_conv_net(9, 3, rng);
    collab::MoveCase mc = stone_case(9, 0, 0, {{8, 8, 1}, {8, 7, 0}});
    const auto post = forward(cn.net, cn.params, mc.post_board);
    const auto pre = forward(cn.net, cn.params, mc.pre_board);
    // changed conv activations (the mask support)
    std::vector<std::pair<int, int>> changed;
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c)
            for (int ch = 0; ch < 3; ++ch)
                if (post.x(1).at(r, c, ch) != pre.x(1).at(r, c, ch)) {
                    changed.emplace_back(r, c);
                    break;
                }
    REQUIRE(!changed.empty());
    const auto map = collab::collab_map_for_layer(cn.net, cn.params, mc, 1);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) {
            int dist = 100;
            for (const auto& [cr, cc] : changed)
                dist = std::min(dist, std::max(std::abs(r - cr), std::abs(c - cc)));
            if (dist > 1)  // beyond one 3x3 kernel radius from any changed unit
                CHECK(map.values.at(r, c) == 0.0);
        }
}

TEST_CASE("rotation equivariance for a 1x1-conv network") {
    NetworkSpec net;
    net.input_h = 5;
    net.input_w = 5;
    net.input_c = 2;
    net.layers.push_back(LayerSpec::conv(1, 3));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::conv(1, 2));
    net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::avgpool(5));
    net.layers.push_back(LayerSpec::fc(1));
    net.scalar_output = true;
    Rng rng(55);
    nn::Parameters params = nn::init_params(net, rng);

    collab::MoveCase mc = stone_case(5, 1, 2, {{0, 0, 1}, {3, 4, 0}});
    const auto base = collab::network_collab_map(net, params, mc, std::vector<int>{1, 2}, "t");

    collab::MoveCase rot;
    rot.pre_board = rotate_ccw(mc.pre_board, 1);
    rot.post_board = rotate_ccw(mc.post_board, 1);
    const auto rc = rotate_coord_ccw(mc.target_r, mc.target_c, 5, 5, 1);
    rot.target_r = rc[0];
    rot.target_c = rc[1];
    const auto rotated = collab::network_collab_map(net, params, rot, std::vector<int>{1, 2}, "t");

    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            const auto to = rotate_coord_ccw(r, c, 5, 5, 1);
            CHECK(rotated.values.at(to[0], to[1]) ==
                  doctest::Approx(base.values.at(r, c)).epsilon(1e-10));
        }
}

TEST_CASE("normalize_map: L1, idempotence, scale invariance, zero flag") {
    collab::CollabMap m;
    m.values = collab::ScoreGrid::zeros(1, 2);
    m.values.at(0, 0) = 2.0;
    m.values.at(0, 1) = -2.0;
    const auto n1 = collab::normalize_map(m);
    CHECK(n1.values.at(0, 0) == doctest::Approx(0.5));
    CHECK(n1.values.at(0, 1) == doctest::Approx(-0.5));
    const auto n2 = collab::normalize_map(n1);
    CHECK(n2.values.at(0, 0) == doctest::Approx(n1.values.at(0, 0)));

    collab::CollabMap scaled = m;
    for (double& v : scaled.values.v) v *= 7.0;
    const auto n3 = collab::normalize_map(scaled);
    CHECK(n3.values.at(0, 0) == doctest::Approx(n1.values.at(0, 0)));
    CHECK(n3.values.at(0, 1) == doctest::Approx(n1.values.at(0, 1)));

    collab::CollabMap zero;
    zero.values = collab::ScoreGrid::zeros(2, 2);
    const auto nz = collab::normalize_map(zero);
    CHECK(nz.all_zero);
    CHECK(nz.values.abs_sum() == 0.0);
}

TEST_CASE("fuse_maps: identity, linearity and lattice padding") {
    const int board = 5;
    collab::CollabMap value;
    value.values = collab::ScoreGrid::zeros(board, board);
    value.values.at(0, 0) = 1.0;
    value.values.at(2, 2) = -3.0;

    distill::Lattice lat;
    lat.row = 1;
    lat.col = 1;
    lat.h = 3;
    lat.w = 3;
    lat.rot = 0;

    collab::CollabMap zero_student;
    zero_student.values = collab::ScoreGrid::zeros(3, 3);
    zero_student.lattice = lat;

    SUBCASE("zero student maps leave the value map") {
        const auto fused = collab::fuse_maps(value, zero_student, zero_student, board, board);
        const auto vn = collab::normalize_map(value);
        for (int r = 0; r < board; ++r)
            for (int c = 0; c < board; ++c)
                CHECK(fused.values.at(r, c) == doctest::Approx(vn.values.at(r, c)));
    }

    SUBCASE("three identical maps triple the values and keep the argmax") {
        collab::CollabMap whole;
        whole.values = value.values;
        distill::Lattice full;
        full.row = 0;
        full.col = 0;
        full.h = board;
        full.w = board;
        collab::CollabMap s1 = whole, s2 = whole;
        s1.lattice = full;
        s2.lattice = full;
        const auto fused = collab::fuse_maps(whole, s1, s2, board, board);
        const auto vn = collab::normalize_map(whole);
        for (int r = 0; r < board; ++r)
            for (int c = 0; c < board; ++c)
                CHECK(fused.values.at(r, c) == doctest::Approx(3.0 * vn.values.at(r, c)));
    }

    SUBCASE("student contribution is zero outside its lattice") {
        collab::CollabMap student;
        student.values = collab::ScoreGrid::zeros(3, 3);
        student.values.at(0, 0) = 4.0;
        student.lattice = lat;
        collab::CollabMap zero_value;
        zero_value.values = collab::ScoreGrid::zeros(board, board);
        const auto fused = collab::fuse_maps(zero_value, student, zero_student, board, board);
        for (int r = 0; r < board; ++r)
            for (int c = 0; c < board; ++c)
                if (!lat.contains(r, c)) CHECK(fused.values.at(r, c) == 0.0);
        CHECK(fused.values.at(1, 1) == doctest::Approx(1.0));  // normalized single entry
    }

    SUBCASE("inconsistent lattice geometry is rejected") {
        collab::CollabMap bad;
        bad.values = collab::ScoreGrid::zeros(3, 3);
        bad.values.at(0, 0) = 1.0;
        distill::Lattice off;
        off.row = 4;
        off.col = 4;
        off.h = 3;
        off.w = 3;
        bad.lattice = off;
        CHECK_THROWS_AS(collab::fuse_maps(value, bad, zero_student, board, board), ConfigError);
    }
}

TEST_CASE("clip_conv_ordinals drops layers the network does not have") {
    Rng rng(56);
    const NetworkSpec small = nn::make_residual_net(5, 5, 2, 4, 1, 1, false);  // 3 convs
    const std::vector<int> wanted{1, 3, 5, 7};
    const auto clipped = collab::clip_conv_ordinals(small, wanted);
    CHECK(clipped == std::vector<int>{1, 3});
    const NetworkSpec deep = nn::make_residual_net(5, 5, 2, 4, 4, 1, false);  // 9 convs
    CHECK(collab::clip_conv_ordinals(deep, wanted) == wanted);
}

TEST_CASE("duplicated layer in the fusion list doubles that term") {
    Rng rng(57);
    ConvNet cn = single_conv_net(5, 2, rng);
    collab::MoveCase mc = stone_case(5, 2, 3, {{0, 1, 1}});
    const auto once = collab::network_collab_map(cn.net, cn.params, mc, std::vector<int>{1}, "t");
    const auto twice =
        collab::network_collab_map(cn.net, cn.params, mc, std::vector<int>{1, 1}, "t");
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            CHECK(twice.values.at(r, c) == doctest::Approx(2.0 * once.values.at(r, c)));
}

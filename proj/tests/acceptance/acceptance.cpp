// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
// The slow criteria write their emitted numbers under --out (default
// acceptance_out/); the determinism criterion repeats them with the same
// seeds and byte-compares the artifact trees.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gocollab/collab.hpp"
#include "gocollab/config.hpp"
#include "gocollab/contribution.hpp"
#include "gocollab/distill.hpp"
#include "gocollab/go/selfplay.hpp"
#include "gocollab/go/synthetic.hpp"
#include "gocollab/heatmap.hpp"
#include "gocollab/metrics.hpp"
#include "gocollab/nn/kernels.hpp"
#include "gocollab/nn/params_io.hpp"
#include "gocollab/pipeline.hpp"

#include "../generators.hpp"
#include "../oracles.hpp"

using namespace gocollab;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
    int id;
    std::string label;
    std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// shared generators
// ---------------------------------------------------------------------------

Tensor vec(const std::vector<double>& vals) {
    Tensor t = Tensor::zeros1(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) t.flat()[i] = vals[i];
    return t;
}

using generators::add_stone_case;
using generators::random_boards;
using generators::random_chain_net;
using generators::RandomNet;
using oracles::path_enumerate;
using oracles::path_net_from;

// ---------------------------------------------------------------------------
// criteria 1-6 and 10: fast property checks
// ---------------------------------------------------------------------------

bool criterion1_decomposition(std::string& detail) {
    const auto t0 = Clock::now();
    Rng rng(101);
    int done = 0;
    double worst = 0.0;
    while (done < 1000) {
        const int n = 1 + rng.below_int(8);
        std::vector<double> xs(static_cast<std::size_t>(n)), ws(xs.size());
        for (auto& v : xs) v = rng.uniform(-2.0, 2.0);
        for (auto& v : ws) v = rng.uniform(-2.0, 2.0);
        const double bias = (done % 2 == 0) ? rng.uniform(0.0, 1.5) : rng.uniform(-1.5, 0.0);
        Tensor w = Tensor::zeros({1, n});
        for (int j = 0; j < n; ++j) w.at2(0, j) = ws[static_cast<std::size_t>(j)];
        const Tensor x = vec(xs);
        double o_val = bias;
        for (int j = 0; j < n; ++j)
            o_val += ws[static_cast<std::size_t>(j)] * xs[static_cast<std::size_t>(j)];
        if (!(o_val > 1e-6)) continue;  // the identity is stated for distributing units
        const double c_o = rng.uniform(-1.0, 1.0);
        const Tensor c =
            contrib::propagate_linear_fc(vec({c_o}), w, vec({bias}), x, vec({o_val}), nullptr);
        const double expected = c_o * (o_val - bias) / (o_val + std::max(-bias, 0.0));
        worst = std::max(worst, std::abs(c.sum() - expected));
        ++done;
    }
    const double elapsed = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |sum - expected| = %.2e, %.2f s", worst, elapsed);
    detail = buf;
    return worst < 1e-9 && elapsed < 1.0;
}

bool criterion2_conservation(std::string& detail) {
    const auto t0 = Clock::now();
    Rng rng(102);
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
        RandomNet rn = random_chain_net(rng, 3, 5, /*zero_bias=*/true, /*allow_skip=*/true);
        if (rn.net.layer_count() > 5) continue;
        const auto tr = forward(rn.net, rn.params, rn.input);
        if (!(tr.output() > 1e-4)) continue;
        const auto m = contrib::propagate_to_layer(rn.net, rn.params, tr, 0);
        worst = std::max(worst, std::abs(m.values.sum() - 1.0));
        ++done;
    }
    const double elapsed = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |sum - 1| = %.2e, %.2f s", worst, elapsed);
    detail = buf;
    return worst < 1e-5 && elapsed < 10.0;
}

bool criterion3_path_oracle(std::string& detail) {
    const auto t0 = Clock::now();
    Rng rng(103);
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
        RandomNet rn = random_chain_net(rng, 3, 4, rng.uniform() < 0.5, true);
        const auto tr = forward(rn.net, rn.params, rn.input);
        if (!(tr.output() > 1e-4)) continue;
        const auto m = contrib::propagate_to_layer(rn.net, rn.params, tr, 0);
        const std::vector<double> flat(rn.input.flat().begin(), rn.input.flat().end());
        const auto expected = path_enumerate(path_net_from(rn.net, rn.params, flat));
        for (std::size_t i = 0; i < expected.size(); ++i)
            worst = std::max(worst, std::abs(m.values.flat()[i] - expected[i]));
        ++done;
    }
    const double elapsed = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |chained - enumerated| = %.2e, %.2f s", worst, elapsed);
    detail = buf;
    return worst < 1e-8 && elapsed < 10.0;
}

bool criterion4_bn_fold(std::string& detail) {
    Rng rng(104);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = 3 + rng.below_int(5);
        const int w = 3 + rng.below_int(5);
        const int ci = 1 + rng.below_int(3);
        const int co = 1 + rng.below_int(4);
        nn::NetworkSpec composed;
        composed.input_h = h;
        composed.input_w = w;
        composed.input_c = ci;
        composed.layers.push_back(nn::LayerSpec::conv(3, co));
        composed.layers.push_back(nn::LayerSpec::batchnorm());
        nn::Parameters params = nn::init_params(composed, rng);
        auto& bn = params.layers[1];
        for (int ch = 0; ch < co; ++ch) {
            bn.gamma.at(ch) = rng.uniform(0.3, 2.0);
            bn.sigma.at(ch) = rng.uniform(0.3, 2.0);
            bn.mu.at(ch) = rng.uniform(-1.0, 1.0);
            bn.beta.at(ch) = rng.uniform(-1.0, 1.0);
        }
        nn::NetworkSpec folded_net = composed;
        folded_net.layers.pop_back();
        nn::Parameters folded = nn::init_params(folded_net, rng);
        folded.layers[0].weight = params.layers[0].weight;
        folded.layers[0].bias = params.layers[0].bias;
        nn::absorb_batchnorm(folded.layers[0].weight, folded.layers[0].bias, bn.gamma, bn.sigma,
                             bn.mu, bn.beta);
        Tensor in = Tensor::zeros3(h, w, ci);
        for (double& v : in.flat()) v = rng.uniform(-2.0, 2.0);
        const auto a = forward(composed, params, in);
        const auto b = forward(folded_net, folded, in);
        for (std::size_t i = 0; i < a.x(2).size(); ++i)
            worst = std::max(worst, std::abs(a.x(2).flat()[i] - b.x(1).flat()[i]));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |folded - composed| = %.2e", worst);
    detail = buf;
    return worst < 1e-5;
}

bool criterion5_gradients(std::string& detail) {
    // one network containing every layer kind
    nn::NetworkSpec net;
    net.input_h = 4;
    net.input_w = 4;
    net.input_c = 2;
    net.layers.push_back(nn::LayerSpec::conv(3, 4));
    net.layers.push_back(nn::LayerSpec::batchnorm());
    net.layers.push_back(nn::LayerSpec::relu());
    net.layers.push_back(nn::LayerSpec::conv(3, 4));
    net.layers.push_back(nn::LayerSpec::batchnorm());
    net.layers.push_back(nn::LayerSpec::residual_add(3));
    net.layers.push_back(nn::LayerSpec::relu());
    net.layers.push_back(nn::LayerSpec::maxpool(2));
    net.layers.push_back(nn::LayerSpec::avgpool(2));
    net.layers.push_back(nn::LayerSpec::fc(1));
    net.layers.push_back(nn::LayerSpec::sigmoid());
    net.scalar_output = true;
    Rng rng(105);
    nn::Parameters params = nn::init_params(net, rng);
    for (int li : {1, 4}) {
        auto& lp = params.layers[static_cast<std::size_t>(li)];
        for (int ch = 0; ch < lp.gamma.length(); ++ch) {
            lp.gamma.at(ch) = 0.6 + 0.15 * ch;
            lp.sigma.at(ch) = 0.7 + 0.2 * ch;
            lp.mu.at(ch) = 0.1 * ch - 0.15;
            lp.beta.at(ch) = 0.05 * ch;
        }
    }
    Tensor input = Tensor::zeros3(4, 4, 2);
    for (double& v : input.flat()) v = rng.uniform(-1.0, 1.0);

    const auto tr = forward(net, params, input);
    std::vector<double> projection(tr.outputs.back().size());
    for (double& p : projection) p = rng.uniform(-1.0, 1.0);
    Tensor d_final = Tensor::zeros(tr.outputs.back().shape());
    for (std::size_t i = 0; i < projection.size(); ++i) d_final.flat()[i] = projection[i];
    const nn::Gradients grads = backward_gradients(net, params, tr, d_final);

    auto loss = [&](const nn::Parameters& p) {
        const auto t = forward(net, p, input);
        double acc = 0.0;
        for (std::size_t i = 0; i < t.outputs.back().size(); ++i)
            acc += t.outputs.back().flat()[i] * projection[i];
        return acc;
    };
    const double step = 1e-4;
    double worst = 0.0;
    int checked = 0;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        auto probe_tensor = [&](Tensor nn::LayerParams::* member) {
            Tensor& pt = params.layers[li].*member;
            const Tensor& gt = grads.layers[li].*member;
            if (pt.empty() || gt.empty()) return;
            for (std::size_t i = 0; i < pt.size(); ++i) {
                const double saved = pt.flat()[i];
                pt.flat()[i] = saved + step;
                const double up = loss(params);
                pt.flat()[i] = saved - step;
                const double down = loss(params);
                pt.flat()[i] = saved;
                const double numeric = (up - down) / (2.0 * step);
                const double analytic = gt.flat()[i];
                const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
                worst = std::max(worst, std::abs(numeric - analytic) / scale);
                ++checked;
            }
        };
        probe_tensor(&nn::LayerParams::weight);
        probe_tensor(&nn::LayerParams::bias);
        probe_tensor(&nn::LayerParams::gamma);
        probe_tensor(&nn::LayerParams::beta);
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d parameters checked, max rel err = %.2e", checked, worst);
    detail = buf;
    return worst < 1e-3;
}

bool criterion6_mask_properties(std::string& detail) {
    Rng rng(106);
    const double eps = collab::kActivationEps;
    int zero_mismatches = 0, sign_mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + rng.below_int(8);
        Tensor c = Tensor::zeros1(n), o = Tensor::zeros1(n), o_bfr = Tensor::zeros1(n);
        for (int i = 0; i < n; ++i) {
            const double roll = rng.uniform();
            c.at(i) = roll < 0.2 ? 0.0 : rng.uniform(-1.0, 1.0);
            o.at(i) = roll < 0.4 ? rng.uniform(-1.0, eps) : rng.uniform(eps * 2, 2.0);
            o_bfr.at(i) = rng.uniform() < 0.3 ? o.at(i) : rng.uniform(-1.0, 2.0);
        }
        const Tensor masked = collab::collab_mask(c, o, o_bfr, eps);
        for (int i = 0; i < n; ++i) {
            const bool expect_zero = o.at(i) <= eps || o.at(i) == o_bfr.at(i) || c.at(i) == 0.0;
            if (expect_zero != (masked.at(i) == 0.0)) ++zero_mismatches;
            if (!expect_zero && std::signbit(masked.at(i)) != std::signbit(c.at(i)))
                ++sign_mismatches;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "zero-set mismatches %d, sign mismatches %d", zero_mismatches,
                  sign_mismatches);
    detail = buf;
    return zero_mismatches == 0 && sign_mismatches == 0;
}

bool criterion10_metrics(std::string& detail) {
    const std::vector<double> a{0.5, 0.5, 0.0};
    const std::vector<double> b{1.0, 0.0, 0.0};
    bool ok = metrics::weighted_jaccard(a, a) == 1.0;
    ok = ok &&
         metrics::weighted_jaccard(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) ==
             0.0;
    ok = ok && std::abs(metrics::weighted_jaccard(a, b) - 1.0 / 3.0) < 1e-15;

    const auto norm = metrics::normalize_dist(std::vector<double>{2.0, 6.0});
    const auto twice = metrics::normalize_dist(norm);
    ok = ok && norm == twice;

    // scale invariance under 100 random positive scalings of the raw map
    Rng rng(110);
    collab::ScoreGrid map = collab::ScoreGrid::zeros(5, 5);
    for (double& v : map.v) v = rng.uniform(-1.0, 1.0);
    const std::vector<std::pair<int, int>> stones{{0, 0}, {1, 3}, {2, 2}, {4, 1}, {3, 4}};
    const auto p_hat = metrics::normalize_dist(std::vector<double>{0.1, 0.4, 0.2, 0.8, 0.05});
    const auto q0 = metrics::normalize_dist(metrics::collab_strengths(map, stones));
    const double base = metrics::weighted_jaccard(p_hat, q0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double scale = rng.uniform(1e-4, 1e4);
        collab::ScoreGrid scaled = map;
        for (double& v : scaled.v) v *= scale;
        const auto q = metrics::normalize_dist(metrics::collab_strengths(scaled, stones));
        worst = std::max(worst, std::abs(metrics::weighted_jaccard(p_hat, q) - base));
    }
    ok = ok && worst < 1e-12;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "hand cases exact, scale drift %.2e", worst);
    detail = buf;
    return ok;
}

// ---------------------------------------------------------------------------
// criteria 7 + 8: synthetic-region recovery and gate usefulness
// ---------------------------------------------------------------------------

struct SyntheticSuiteResult {
    int hits = 0, probes = 0;
    double heldout_loss = 0.0, uniform_loss = 0.0;
    double seconds = 0.0;
};

SyntheticSuiteResult run_synthetic_suite(const fs::path& out_dir) {
    const auto t0 = Clock::now();
    fs::create_directories(out_dir);

    Rng rng(731);
    auto ensemble = distill::make_student_ensemble(9, 9, 7, 7, distill::LatticeMode::Corners, 0,
                                                   16, 2, "coarse", rng);
    const go::Region region{0, 0, 4, 4};
    const auto teacher = go::make_synthetic_teacher(region, go::default_synthetic_patterns());
    Rng brng(732);
    const auto boards = random_boards(150, 9, 0.3, brng);

    nn::TrainConfig scfg;
    scfg.epochs = 25;
    scfg.learning_rate = 0.006;
    scfg.decay_every = 8;
    scfg.seed = 61;
    const auto sres = distill::train_students(teacher, ensemble, boards, scfg);

    std::vector<collab::MoveCase> cases;
    Rng crng(733);
    while (cases.size() < 250) {
        const Tensor& b =
            boards[static_cast<std::size_t>(crng.below_int(static_cast<int>(boards.size())))];
        const int r = crng.below_int(9), c = crng.below_int(9);
        if (b.at(r, c, 0) != 0.0 || b.at(r, c, 1) != 0.0) continue;
        cases.push_back(add_stone_case(b, r, c, crng.below_int(2)));
    }
    auto gate = distill::make_gating_net(ensemble, 16, 2, rng);
    nn::TrainConfig gcfg;
    gcfg.epochs = 25;
    gcfg.learning_rate = 0.003;
    gcfg.decay_every = 8;
    gcfg.seed = 62;
    const auto gres = distill::train_gate(teacher, ensemble, gate, cases, gcfg, 0.2);

    SyntheticSuiteResult result;
    result.heldout_loss = gres.heldout_loss;
    result.uniform_loss = gres.uniform_baseline_loss;

    // 200 capture-free probe moves strictly inside the region
    std::ofstream probes_out(out_dir / "probes.jsonl", std::ios::trunc);
    Rng prng(734);
    while (result.probes < 200) {
        const Tensor& b =
            boards[static_cast<std::size_t>(prng.below_int(static_cast<int>(boards.size())))];
        const int r = prng.below_int(region.h), c = prng.below_int(region.w);
        if (b.at(r, c, 0) != 0.0 || b.at(r, c, 1) != 0.0) continue;
        const auto mc = add_stone_case(b, r, c, prng.below_int(2));
        const auto rep = distill::significance_scores(ensemble, gate, mc);
        const auto& lat = ensemble.lattices[static_cast<std::size_t>(rep.selected)];
        const bool contains = lat.contains(r, c);
        if (contains) ++result.hits;
        ++result.probes;
        json j;
        j["r"] = r;
        j["c"] = c;
        j["selected"] = rep.selected;
        j["contains"] = contains;
        j["scores"] = rep.scores;
        probes_out << j.dump() << "\n";
    }
    result.seconds = seconds_since(t0);

    json summary;
    summary["hits"] = result.hits;
    summary["probes"] = result.probes;
    summary["student_final_loss"] = sres.epoch_loss.back();
    summary["gate_heldout_loss"] = result.heldout_loss;
    summary["gate_uniform_loss"] = result.uniform_loss;
    std::ofstream(out_dir / "summary.json", std::ios::trunc) << summary.dump(2) << "\n";
    return result;
}

// ---------------------------------------------------------------------------
// criterion 9: end-to-end pipeline
// ---------------------------------------------------------------------------

struct PipelineSuiteResult {
    double seconds = 0.0;
    int explained = 0;
    int valid_artifacts = 0;
    int nonzero_required = 0, nonzero_found = 0;
};

PipelineSuiteResult run_pipeline_suite(const fs::path& out_dir) {
    const auto t0 = Clock::now();
    fs::create_directories(out_dir);
    RunConfig cfg;  // dataset/network defaults: 500 games on 9x9
    cfg.seed = 7;

    pipeline::run_selfplay(cfg, out_dir);
    pipeline::run_train_teacher(cfg, out_dir);
    pipeline::run_train_students(cfg, out_dir);
    pipeline::run_train_gate(cfg, out_dir);

    // Ten held-out moves from fresh games the training never saw. The
    // propagation rule sends nothing through non-positive activations, so
    // explanations attach to positions the value net scores positive; the
    // held-out moves are drawn accordingly, and must actually change the
    // teacher's output. Positions also need surrounding stones: a lone stone
    // has no context, every component map collapses onto it and the
    // normalized terms can cancel exactly.
    const nn::NetworkSpec tnet = pipeline::teacher_net(cfg);
    const nn::Parameters tparams =
        nn::load_params(pipeline::Artifacts{out_dir}.teacher_params(), tnet);
    const auto heldout_games = go::selfplay_generate(
        60, go::policy_from_string(cfg.selfplay_policy), cfg.seed + 9999, cfg.board_size,
        cfg.board_size, cfg.selfplay_move_cap());

    PipelineSuiteResult result;
    std::vector<std::pair<collab::MoveCase, go::Cell>> picked;
    for (const auto& rec : heldout_games) {
        go::GameState prev = go::GameState::empty(rec.h, rec.w);
        for (std::size_t mi = 0; mi < rec.moves.size() && picked.size() < 10; ++mi) {
            const go::Move m = rec.moves[mi];
            const go::GameState& cur = rec.states[mi];
            if (!m.is_pass()) {
                const Tensor post_planes = go::encode_state(cur);
                const double pre = forward(tnet, tparams, go::encode_state(prev)).output();
                const double post = forward(tnet, tparams, post_planes).output();
                if (post > 0.05 && std::abs(post - pre) > 1e-4 && post_planes.sum() >= 4.0) {
                    collab::MoveCase mc;
                    mc.pre_board = go::encode_state(prev);
                    mc.post_board = post_planes;
                    mc.target_r = m.r;
                    mc.target_c = m.c;
                    picked.emplace_back(std::move(mc), prev.to_move);
                }
            }
            prev = cur;
        }
        if (picked.size() >= 10) break;
    }

    for (std::size_t i = 0; i < picked.size(); ++i) {
        const auto& [mc, color] = picked[i];
        const std::string id = "heldout_" + std::to_string(i);
        const auto res = pipeline::run_explain(cfg, out_dir, mc.pre_board, mc.target_r,
                                               mc.target_c, color, id);
        ++result.explained;

        // artifact validity: parseable significance JSON per scale, heatmap
        // with a P6 header, map CSV with exactly board_size^2 data rows
        const pipeline::Artifacts art{out_dir};
        bool valid = true;
        for (const char* scale : {"coarse", "fine"}) {
            std::ifstream sf(art.significance(id, scale));
            const json sj = json::parse(sf, nullptr, false);
            valid = valid && !sj.is_discarded() && sj.contains("scores") &&
                    sj.contains("normalized") && sj.contains("selected");
            if (valid && !sj.at("degenerate").get<bool>()) {
                double total = 0.0;
                for (double v : sj.at("normalized").get<std::vector<double>>()) total += v;
                valid = valid && std::abs(total - 1.0) < 1e-9;
            }
        }
        {
            std::ifstream hm(art.heatmap(id), std::ios::binary);
            char hdr[2] = {0, 0};
            hm.read(hdr, 2);
            valid = valid && hdr[0] == 'P' && hdr[1] == '6';
        }
        const auto grid = collab::read_map_csv(art.map_csv(id));
        valid = valid && grid.h == cfg.board_size && grid.w == cfg.board_size;
        if (valid) ++result.valid_artifacts;

        if (std::abs(res.teacher_post - res.teacher_pre) > 1e-4) {
            ++result.nonzero_required;
            if (res.fused.values.abs_sum() > 0.0) ++result.nonzero_found;
        }
    }
    result.seconds = seconds_since(t0);

    json summary;
    summary["explained"] = result.explained;
    summary["valid_artifacts"] = result.valid_artifacts;
    summary["nonzero_required"] = result.nonzero_required;
    summary["nonzero_found"] = result.nonzero_found;
    std::ofstream(out_dir / "pipeline_summary.json", std::ios::trunc) << summary.dump(2) << "\n";
    return result;
}

// ---------------------------------------------------------------------------
// criterion 11: determinism
// ---------------------------------------------------------------------------

bool compare_trees(const fs::path& a, const fs::path& b, std::string& detail) {
    std::map<std::string, fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa[fs::relative(e.path(), a).string()] = e.path();
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb[fs::relative(e.path(), b).string()] = e.path();
    if (fa.size() != fb.size()) {
        detail = "file counts differ: " + std::to_string(fa.size()) + " vs " +
                 std::to_string(fb.size());
        return false;
    }
    for (const auto& [rel, pa] : fa) {
        const auto it = fb.find(rel);
        if (it == fb.end()) {
            detail = "missing in rerun: " + rel;
            return false;
        }
        std::ifstream sa(pa, std::ios::binary), sb(it->second, std::ios::binary);
        std::ostringstream ba, bb;
        ba << sa.rdbuf();
        bb << sb.rdbuf();
        if (ba.str() != bb.str()) {
            detail = "bytes differ: " + rel;
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out = "acceptance_out";
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--out" && i + 1 < argc) {
            out = argv[++i];
        } else if (arg == "--criterion" && i + 1 < argc) {
            only.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--out DIR] [--criterion N]...\n");
            return 2;
        }
    }
    fs::create_directories(out);

    SyntheticSuiteResult synth;
    PipelineSuiteResult pipe;
    bool synth_ran = false, pipe_ran = false;
    auto ensure_synth = [&]() {
        if (!synth_ran) {
            synth = run_synthetic_suite(out / "c7");
            synth_ran = true;
        }
    };
    auto ensure_pipe = [&]() {
        if (!pipe_ran) {
            pipe = run_pipeline_suite(out / "c9");
            pipe_ran = true;
        }
    };

    std::vector<Criterion> criteria;
    criteria.push_back({1, "contribution decomposition identity (1000 units, 1e-9, <1s)",
                        criterion1_decomposition});
    criteria.push_back(
        {2, "zero-bias conservation (100 nets, 1e-5, <10s)", criterion2_conservation});
    criteria.push_back(
        {3, "path-enumeration oracle (100 nets, 1e-8, <10s)", criterion3_path_oracle});
    criteria.push_back({4, "batch-norm fold equivalence (100 pairs, 1e-5)", criterion4_bn_fold});
    criteria.push_back(
        {5, "finite-difference gradients (every layer kind, 1e-3)", criterion5_gradients});
    criteria.push_back(
        {6, "activation-mask nullity and sign (1000 triples)", criterion6_mask_properties});
    criteria.push_back({7, "synthetic-region recovery (>=90% of 200 probes, <10min)",
                        [&](std::string& d) {
                            ensure_synth();
                            char buf[128];
                            std::snprintf(buf, sizeof(buf), "%d/%d probes hit, %.0f s",
                                          synth.hits, synth.probes, synth.seconds);
                            d = buf;
                            return synth.hits >= 180 && synth.probes == 200 &&
                                   synth.seconds < 600.0;
                        }});
    criteria.push_back({8, "gate beats the uniform-weight baseline on held-out loss",
                        [&](std::string& d) {
                            ensure_synth();
                            char buf[128];
                            std::snprintf(buf, sizeof(buf), "heldout %.4f vs uniform %.4f",
                                          synth.heldout_loss, synth.uniform_loss);
                            d = buf;
                            return synth.heldout_loss < synth.uniform_loss;
                        }});
    criteria.push_back(
        {9, "end-to-end pipeline on 500 games with 10 held-out explanations (<30min)",
         [&](std::string& d) {
             ensure_pipe();
             char buf[160];
             std::snprintf(buf, sizeof(buf), "%d explained, %d valid, nonzero %d/%d, %.0f s",
                           pipe.explained, pipe.valid_artifacts, pipe.nonzero_found,
                           pipe.nonzero_required, pipe.seconds);
             d = buf;
             return pipe.explained == 10 && pipe.valid_artifacts == 10 &&
                    pipe.nonzero_found == pipe.nonzero_required && pipe.seconds < 1800.0;
         }});
    criteria.push_back({10, "metric unit suite (jaccard 1, 0, 1/3; idempotence; scale invariance)",
                        criterion10_metrics});
    criteria.push_back({11, "determinism: repeating 7-9 reproduces all artifacts byte-identically",
                        [&](std::string& d) {
                            ensure_synth();
                            ensure_pipe();
                            run_synthetic_suite(out / "c7_rerun");
                            run_pipeline_suite(out / "c9_rerun");
                            std::string why;
                            if (!compare_trees(out / "c7", out / "c7_rerun", why)) {
                                d = "synthetic suite: " + why;
                                return false;
                            }
                            if (!compare_trees(out / "c9", out / "c9_rerun", why)) {
                                d = "pipeline: " + why;
                                return false;
                            }
                            d = "both artifact trees byte-identical";
                            return true;
                        }});

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s -- %s\n", ok ? "PASS" : "FAIL", c.id, c.label.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

#include "gocollab/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "gocollab/contribution.hpp"
#include "gocollab/errors.hpp"
#include "gocollab/heatmap.hpp"
#include "gocollab/nn/params_io.hpp"

namespace gocollab::pipeline {

using nlohmann::json;

namespace {

// stable sub-seeds per pipeline stage
enum : std::uint64_t {
    kSeedTeacherInit = 0x7e41,
    kSeedTeacherTrain = 0x7e42,
    kSeedStudentInit = 0x57d1,
    kSeedStudentTrain = 0x57d2,
    kSeedGateInit = 0x6a71,
    kSeedGateTrain = 0x6a72,
    kSeedSampling = 0x5a3f,
};

std::uint64_t sub_seed(const RunConfig& cfg, std::uint64_t tag) {
    return cfg.seed * 0x100000001b3ull + tag;
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw PrerequisiteMissing(p.string());
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, losses[i]);
        os << buf;
    }
}

distill::TeacherFn nn_teacher(const nn::NetworkSpec& net, const nn::Parameters& params) {
    return [&net, &params](const Tensor& board) {
        return forward(net, params, board).output();
    };
}

nn::TrainConfig student_train_config(const RunConfig& cfg) {
    nn::TrainConfig tc;
    tc.epochs = cfg.student_epochs;
    tc.learning_rate = cfg.student_lr;
    tc.momentum = cfg.momentum;
    tc.decay_every = cfg.decay_every;
    tc.decay_factor = cfg.decay_factor;
    tc.seed = sub_seed(cfg, kSeedStudentTrain);
    return tc;
}

json report_to_json(const distill::SignificanceReport& rep) {
    json j;
    j["scale"] = rep.scale;
    j["scores"] = rep.scores;
    j["normalized"] = rep.normalized;
    j["selected"] = rep.selected;
    j["degenerate"] = rep.degenerate;
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << "\n";
}

json load_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw IoError("malformed JSON in " + path.string());
    return j;
}

}  // namespace

nn::NetworkSpec teacher_net(const RunConfig& cfg) {
    return nn::make_residual_net(cfg.board_size, cfg.board_size, 2, cfg.teacher_channels,
                                 cfg.teacher_blocks, 1, cfg.teacher_sigmoid);
}

distill::StudentEnsemble coarse_ensemble(const RunConfig& cfg) {
    Rng rng(sub_seed(cfg, kSeedStudentInit));
    return distill::make_student_ensemble(cfg.board_size, cfg.board_size, cfg.coarse_lattice,
                                          cfg.coarse_lattice, distill::LatticeMode::Corners, 0,
                                          cfg.student_channels, cfg.student_blocks, "coarse", rng);
}

distill::StudentEnsemble fine_ensemble(const RunConfig& cfg) {
    Rng rng(sub_seed(cfg, kSeedStudentInit) + 1);
    return distill::make_student_ensemble(cfg.board_size, cfg.board_size, cfg.fine_lattice,
                                          cfg.fine_lattice, distill::LatticeMode::Grid,
                                          cfg.fine_grid, cfg.student_channels, cfg.student_blocks,
                                          "fine", rng);
}

void run_selfplay(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Artifacts art{out_dir};
    const auto records = go::selfplay_generate(
        cfg.selfplay_games, go::policy_from_string(cfg.selfplay_policy), cfg.seed,
        cfg.board_size, cfg.board_size, cfg.selfplay_move_cap());
    go::save_games_jsonl(art.games(), records);
    const auto samples =
        go::dataset_from_records(records, cfg.teacher_sample_cap, sub_seed(cfg, kSeedSampling));
    go::save_dataset_jsonl(art.dataset(), samples);
    write_config_snapshot(out_dir, cfg);
    std::cout << "selfplay: " << records.size() << " games, " << samples.size()
              << " labeled positions\n";
}

void run_train_teacher(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Artifacts art{out_dir};
    require_file(art.dataset());
    const auto samples = go::load_dataset_jsonl(art.dataset());

    const nn::NetworkSpec net = teacher_net(cfg);
    Rng init_rng(sub_seed(cfg, kSeedTeacherInit));
    nn::Parameters params = nn::init_params(net, init_rng);

    nn::TrainConfig tc;
    tc.epochs = cfg.teacher_epochs;
    tc.learning_rate = cfg.teacher_lr;
    tc.momentum = cfg.momentum;
    tc.decay_every = cfg.decay_every;
    tc.decay_factor = cfg.decay_factor;
    tc.seed = sub_seed(cfg, kSeedTeacherTrain);

    const nn::TrainResult tr = nn::train(net, params, samples, tc, [](int epoch, double loss) {
        std::cout << "teacher epoch " << epoch << " loss " << loss << "\n";
    });
    nn::save_params(art.teacher_params(), params);
    write_loss_csv(art.teacher_loss(), tr.epoch_loss);
    write_config_snapshot(out_dir, cfg);
}

void run_train_students(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Artifacts art{out_dir};
    require_file(art.teacher_params());
    require_file(art.dataset());

    const nn::NetworkSpec tnet = teacher_net(cfg);
    const nn::Parameters tparams = nn::load_params(art.teacher_params(), tnet);
    const auto samples = go::load_dataset_jsonl(art.dataset());

    std::vector<Tensor> boards;
    boards.reserve(samples.size());
    for (const auto& s : samples) boards.push_back(s.input);
    if (cfg.student_board_cap > 0 && static_cast<int>(boards.size()) > cfg.student_board_cap) {
        Rng rng(sub_seed(cfg, kSeedSampling) + 17);
        rng.shuffle(boards);
        boards.resize(static_cast<std::size_t>(cfg.student_board_cap));
    }

    const distill::TeacherFn teacher = nn_teacher(tnet, tparams);
    for (auto* make : {&coarse_ensemble, &fine_ensemble}) {
        distill::StudentEnsemble ensemble = make(cfg);
        const auto result = distill::train_students(teacher, ensemble, boards,
                                                    student_train_config(cfg));
        nn::save_params(art.student_params(ensemble.scale_tag), ensemble.params);
        write_loss_csv(art.student_loss(ensemble.scale_tag), result.epoch_loss);
        json j;
        j["scale"] = ensemble.scale_tag;
        j["lattices"] = json::array();
        for (const auto& lat : ensemble.lattices)
            j["lattices"].push_back({{"row", lat.row}, {"col", lat.col}, {"h", lat.h},
                                     {"w", lat.w}, {"rot", lat.rot}});
        j["final_per_lattice_loss"] = result.per_lattice_loss.back();
        write_json(art.student_summary(ensemble.scale_tag), j);
        std::cout << "students " << ensemble.scale_tag << ": final union loss "
                  << result.epoch_loss.back() << "\n";
    }
    write_config_snapshot(out_dir, cfg);
}

std::vector<collab::MoveCase> move_cases_from_games(const std::vector<go::GameRecord>& records,
                                                    int cap, std::uint64_t seed) {
    std::vector<collab::MoveCase> cases;
    for (const auto& rec : records) {
        go::GameState prev = go::GameState::empty(rec.h, rec.w);
        for (std::size_t mi = 0; mi < rec.moves.size(); ++mi) {
            const go::Move m = rec.moves[mi];
            const go::GameState& cur = rec.states[mi];
            if (!m.is_pass()) {
                collab::MoveCase mc;
                mc.pre_board = go::encode_state(prev);
                mc.post_board = go::encode_state(cur);
                mc.target_r = m.r;
                mc.target_c = m.c;
                cases.push_back(std::move(mc));
            }
            prev = cur;
        }
    }
    if (cap > 0 && static_cast<int>(cases.size()) > cap) {
        Rng rng(seed);
        rng.shuffle(cases);
        cases.resize(static_cast<std::size_t>(cap));
    }
    return cases;
}

void run_train_gate(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Artifacts art{out_dir};
    require_file(art.teacher_params());
    require_file(art.games());
    require_file(art.student_params("coarse"));
    require_file(art.student_params("fine"));

    const nn::NetworkSpec tnet = teacher_net(cfg);
    const nn::Parameters tparams = nn::load_params(art.teacher_params(), tnet);
    const distill::TeacherFn teacher = nn_teacher(tnet, tparams);

    const auto records = go::load_games_jsonl(art.games());
    const auto cases =
        move_cases_from_games(records, cfg.gate_pair_cap, sub_seed(cfg, kSeedSampling) + 29);

    json eval_summary = json::array();
    int scale_index = 0;
    for (auto* make : {&coarse_ensemble, &fine_ensemble}) {
        distill::StudentEnsemble ensemble = make(cfg);
        ensemble.params = nn::load_params(art.student_params(ensemble.scale_tag), ensemble.net);
        Rng grng(sub_seed(cfg, kSeedGateInit) + static_cast<std::uint64_t>(scale_index));
        distill::GatingNet gate =
            distill::make_gating_net(ensemble, cfg.gate_channels, cfg.gate_blocks, grng);

        nn::TrainConfig tc;
        tc.epochs = cfg.gate_epochs;
        tc.learning_rate = cfg.gate_lr;
        tc.momentum = cfg.momentum;
        tc.decay_every = cfg.decay_every;
        tc.decay_factor = cfg.decay_factor;
        tc.seed = sub_seed(cfg, kSeedGateTrain) + static_cast<std::uint64_t>(scale_index);

        const auto result =
            distill::train_gate(teacher, ensemble, gate, cases, tc, cfg.gate_heldout_frac);
        nn::save_params(art.gate_params(ensemble.scale_tag), gate.params);
        write_loss_csv(art.gate_loss(ensemble.scale_tag), result.epoch_loss);
        eval_summary.push_back({{"scale", ensemble.scale_tag},
                                {"heldout_loss", result.heldout_loss},
                                {"uniform_baseline_loss", result.uniform_baseline_loss}});
        std::cout << "gate " << ensemble.scale_tag << ": heldout " << result.heldout_loss
                  << " vs uniform " << result.uniform_baseline_loss << "\n";
        ++scale_index;
    }
    write_json(art.gate_eval(), eval_summary);
    write_config_snapshot(out_dir, cfg);
}

ExplainResult run_explain(const RunConfig& cfg, const fs::path& out_dir, const Tensor& board,
                          int r, int c, go::Cell color, const std::string& board_id,
                          bool diagnostics) {
    fs::create_directories(out_dir);
    const Artifacts art{out_dir};
    require_file(art.teacher_params());
    require_file(art.student_params("coarse"));
    require_file(art.student_params("fine"));
    require_file(art.gate_params("coarse"));
    require_file(art.gate_params("fine"));

    if (r < 0 || c < 0) throw IllegalMove("explain requires a board coordinate, not a pass");

    // rebuild the position and play the move through the rules
    go::GameState state = go::GameState::empty(cfg.board_size, cfg.board_size);
    const auto cells = go::decode_board(board);
    for (int rr = 0; rr < state.h; ++rr)
        for (int cc = 0; cc < state.w; ++cc)
            state.at(rr, cc) = cells[static_cast<std::size_t>(rr) * state.w + cc];
    state.to_move = color;
    const go::GameState post = go::apply_move(state, go::Move{r, c});

    collab::MoveCase mcase;
    mcase.pre_board = go::encode_state(state);
    mcase.post_board = go::encode_state(post);
    mcase.target_r = r;
    mcase.target_c = c;
    mcase.validate();

    const nn::NetworkSpec tnet = teacher_net(cfg);
    const nn::Parameters tparams = nn::load_params(art.teacher_params(), tnet);

    distill::StudentEnsemble coarse = coarse_ensemble(cfg);
    coarse.params = nn::load_params(art.student_params("coarse"), coarse.net);
    distill::StudentEnsemble fine = fine_ensemble(cfg);
    fine.params = nn::load_params(art.student_params("fine"), fine.net);
    distill::GatingNet gate_c, gate_f;
    {
        Rng g0(1), g1(2);
        gate_c = distill::make_gating_net(coarse, cfg.gate_channels, cfg.gate_blocks, g0);
        gate_f = distill::make_gating_net(fine, cfg.gate_channels, cfg.gate_blocks, g1);
        gate_c.params = nn::load_params(art.gate_params("coarse"), gate_c.net);
        gate_f.params = nn::load_params(art.gate_params("fine"), gate_f.net);
    }

    ExplainResult res;
    res.board_id = board_id;
    res.teacher_pre = forward(tnet, tparams, mcase.pre_board).output();
    res.teacher_post = forward(tnet, tparams, mcase.post_board).output();
    res.coarse = distill::significance_scores(coarse, gate_c, mcase);
    res.fine = distill::significance_scores(fine, gate_f, mcase);
    const auto [sel_c, sel_f] = distill::select_lattices(res.coarse, res.fine);

    write_json(art.significance(board_id, "coarse"), report_to_json(res.coarse));
    write_json(art.significance(board_id, "fine"), report_to_json(res.fine));

    // value-net map over the full board
    const auto tlayers = collab::clip_conv_ordinals(tnet, cfg.collab_layers);
    collab::CollabMap value_map = collab::network_collab_map(
        tnet, tparams, mcase, tlayers, "value", cfg.activation_eps);

    // student maps over the selected lattices (crop frame)
    auto student_map = [&](const distill::StudentEnsemble& ens, int sel,
                           const std::string& id) {
        const distill::Lattice& lat = ens.lattices[static_cast<std::size_t>(sel)];
        collab::CollabMap m;
        m.lattice = lat;
        int cr = 0, cc2 = 0;
        const Tensor pre_crop = distill::crop_rotate(mcase.pre_board, lat);
        const Tensor post_crop = distill::crop_rotate(mcase.post_board, lat);
        const bool inside = distill::board_to_crop_coord(lat, mcase.target_r, mcase.target_c, cr, cc2);
        if (!inside || pre_crop == post_crop) {
            // the move does not touch this lattice; its map is empty
            m.values = collab::ScoreGrid::zeros(lat.h, lat.w);
            m.provenance.push_back({id, {}});
            return m;
        }
        collab::MoveCase sub;
        sub.pre_board = pre_crop;
        sub.post_board = post_crop;
        sub.target_r = cr;
        sub.target_c = cc2;
        const auto slayers = collab::clip_conv_ordinals(ens.net, cfg.collab_layers);
        m = collab::network_collab_map(ens.net, ens.params, sub, slayers, id, cfg.activation_eps);
        m.lattice = lat;
        return m;
    };
    const collab::CollabMap coarse_map = student_map(coarse, sel_c, "student13");
    const collab::CollabMap fine_map = student_map(fine, sel_f, "student10");

    res.fused = collab::fuse_maps(value_map, coarse_map, fine_map, cfg.board_size, cfg.board_size);

    collab::write_map_csv(art.map_csv(board_id), res.fused.values);
    collab::write_heatmap_ppm(art.heatmap(board_id), res.fused.values, 24, true);

    if (diagnostics) {
        contrib::PropagationDiag diag;
        const auto post_trace = forward(tnet, tparams, mcase.post_board);
        contrib::propagate_to_layer(tnet, tparams, post_trace, 0, &diag);
        std::ofstream ds(out_dir / ("contribution_diag_" + board_id + ".csv"), std::ios::trunc);
        contrib::write_flow_csv(diag, ds);
    }

    json meta;
    meta["board_id"] = board_id;
    json rows = json::array();
    for (int rr = 0; rr < cfg.board_size; ++rr) {
        json row = json::array();
        for (int cc = 0; cc < cfg.board_size; ++cc) {
            int v = 0;
            if (mcase.post_board.at(rr, cc, 0) != 0.0) v = 1;
            if (mcase.post_board.at(rr, cc, 1) != 0.0) v = 2;
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    meta["post_board"] = std::move(rows);
    meta["move"] = {{"r", r}, {"c", c}, {"color", color == go::Cell::Black ? "black" : "white"}};
    meta["teacher_value_pre"] = res.teacher_pre;
    meta["teacher_value_post"] = res.teacher_post;
    meta["selected_coarse"] = sel_c;
    meta["selected_fine"] = sel_f;
    meta["map_csv"] = art.map_csv(board_id).filename().string();
    write_json(art.explain_meta(board_id), meta);
    write_config_snapshot(out_dir, cfg);
    return res;
}

metrics::EvalReport run_evaluate(const RunConfig& cfg, const fs::path& annotations_dir,
                                 const fs::path& explanations_dir) {
    if (!fs::is_directory(annotations_dir))
        throw PrerequisiteMissing(annotations_dir.string());
    if (!fs::is_directory(explanations_dir))
        throw PrerequisiteMissing(explanations_dir.string());

    std::map<std::string, metrics::AnnotationSet> annotations;
    std::vector<fs::path> ann_files;
    for (const auto& e : fs::directory_iterator(annotations_dir))
        if (e.path().extension() == ".csv") ann_files.push_back(e.path());
    std::sort(ann_files.begin(), ann_files.end());
    for (const auto& p : ann_files) {
        auto set = metrics::load_annotations(p, cfg.board_size, cfg.board_size);
        annotations[set.board_id] = std::move(set);
    }

    std::map<std::string, fs::path> metas;
    std::vector<fs::path> meta_files;
    for (const auto& e : fs::directory_iterator(explanations_dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("explain_", 0) == 0 && e.path().extension() == ".json")
            meta_files.push_back(e.path());
    }
    std::sort(meta_files.begin(), meta_files.end());
    for (const auto& p : meta_files) {
        const json meta = load_json(p);
        metas[meta.at("board_id").get<std::string>()] = p;
    }

    metrics::EvalReport report;
    for (const auto& [id, _] : annotations)
        if (!metas.count(id)) report.unmatched_annotations.push_back(id);
    for (const auto& [id, _] : metas)
        if (!annotations.count(id)) report.unmatched_explanations.push_back(id);

    double jaccard_sum = 0.0, rating_sum = 0.0;
    int rated = 0, matched = 0;
    for (const auto& [id, meta_path] : metas) {
        const auto ann_it = annotations.find(id);
        if (ann_it == annotations.end()) continue;
        const json meta = load_json(meta_path);
        const collab::ScoreGrid map =
            collab::read_map_csv(explanations_dir / meta.at("map_csv").get<std::string>());

        // stones on the post board, excluding the explained move itself
        const auto& rows = meta.at("post_board");
        const int mr = meta.at("move").at("r").get<int>();
        const int mc = meta.at("move").at("c").get<int>();
        std::vector<std::pair<int, int>> stones;
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            for (int c = 0; c < static_cast<int>(rows.at(0).size()); ++c) {
                if (r == mr && c == mc) continue;
                if (rows.at(r).at(c).get<int>() != 0) stones.emplace_back(r, c);
            }
        if (stones.empty()) continue;

        std::vector<double> p(stones.size(), 0.0);
        for (const auto& a : ann_it->second.entries) {
            bool placed = false;
            for (std::size_t i = 0; i < stones.size(); ++i) {
                if (stones[i] == std::make_pair(a.row, a.col)) {
                    p[i] = a.strength;
                    placed = true;
                    break;
                }
            }
            if (!placed)
                throw IoError("annotation for board " + id + " at (" + std::to_string(a.row) +
                              "," + std::to_string(a.col) + ") is not an existing stone");
        }
        const std::vector<double> q = metrics::collab_strengths(map, stones);

        metrics::BoardEval be;
        be.board_id = id;
        be.n_stones = static_cast<int>(stones.size());
        be.rating = ann_it->second.rating;
        double qsum = 0.0, psum = 0.0;
        for (double v : q) qsum += v;
        for (double v : p) psum += v;
        if (qsum > 0.0 && psum > 0.0) {
            be.jaccard = metrics::weighted_jaccard(metrics::normalize_dist(p),
                                                   metrics::normalize_dist(q));
        } else {
            be.jaccard = 0.0;  // one side has empty support
        }
        jaccard_sum += be.jaccard;
        if (be.rating) {
            rating_sum += *be.rating;
            ++rated;
        }
        report.boards.push_back(std::move(be));
        ++matched;
    }
    if (matched == 0)
        throw ConfigError("no board ids are shared between annotations and explanations");
    report.mean_jaccard = jaccard_sum / matched;
    if (rated > 0) report.mean_rating = rating_sum / rated;
    return report;
}

void write_eval_report(const fs::path& path, const metrics::EvalReport& report) {
    json j;
    j["boards"] = json::array();
    for (const auto& b : report.boards) {
        json e = {{"board_id", b.board_id}, {"jaccard", b.jaccard}, {"n_stones", b.n_stones}};
        if (b.rating) e["rating"] = *b.rating;
        j["boards"].push_back(std::move(e));
    }
    j["mean_jaccard"] = report.mean_jaccard;
    if (report.mean_rating) j["mean_rating"] = *report.mean_rating;
    j["unmatched_annotations"] = report.unmatched_annotations;
    j["unmatched_explanations"] = report.unmatched_explanations;
    write_json(path, j);
}

}  // namespace gocollab::pipeline

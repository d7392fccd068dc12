#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gocollab/config.hpp"
#include "gocollab/errors.hpp"
#include "gocollab/go/selfplay.hpp"
#include "gocollab/heatmap.hpp"
#include "gocollab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gocollab;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    if (g.seed_set) cfg.seed = g.seed;
    cfg.validate();
    return cfg;
}

go::Cell parse_color(const std::string& s) {
    if (s == "black" || s == "b") return go::Cell::Black;
    if (s == "white" || s == "w") return go::Cell::White;
    throw ConfigError("color must be black|white");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train a small Go value network and explain its moves via "
                 "contextual collaboration maps"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "Config file (key = value lines)");
    app.add_option("--out-dir", g.out_dir, "Artifact directory");
    auto* seed_opt = app.add_option("--seed", g.seed, "Override the config seed");

    auto* sp = app.add_subcommand("selfplay", "Generate self-play games and a labeled dataset");
    int sp_games = -1;
    sp->add_option("--games", sp_games, "Number of games (overrides config)");

    auto* tt = app.add_subcommand("train-teacher", "Train the value network on the dataset");
    auto* ts = app.add_subcommand("train-students",
                                  "Distill the teacher into lattice student nets (both scales)");
    auto* tg = app.add_subcommand("train-gate", "Fit the mixture-weight gating nets");

    auto* ex = app.add_subcommand("explain", "Explain one move: significance scores + fused map");
    std::string ex_board, ex_move, ex_color = "black", ex_id = "board0";
    bool ex_diag = false;
    ex->add_option("--board", ex_board, "Board file (JSON-lines cell encoding)")->required();
    ex->add_option("--move", ex_move, "Move as row,col")->required();
    ex->add_option("--color", ex_color, "Stone color (black|white)");
    ex->add_option("--id", ex_id, "Board id used in artifact names");
    ex->add_flag("--diag", ex_diag, "Dump the value net's contribution-flow CSV");

    auto* ev = app.add_subcommand("evaluate", "Compare fused maps against human annotations");
    std::string ev_ann, ev_exp;
    ev->add_option("--annotations", ev_ann, "Directory of annotation CSV files")->required();
    ev->add_option("--explanations", ev_exp, "Directory of explain artifacts")->required();

    auto* rd = app.add_subcommand("render", "Render a map CSV as a PPM heatmap");
    std::string rd_map, rd_out;
    bool rd_grid = false;
    rd->add_option("--map", rd_map, "Map CSV (row,col,score)")->required();
    rd->add_option("--out", rd_out, "Output PPM path")->required();
    rd->add_flag("--grid", rd_grid, "Draw the board grid");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        const RunConfig base = resolve_config(g);
        const fs::path out = g.out_dir;
        if (sp->parsed()) {
            RunConfig cfg = base;
            if (sp_games >= 0) cfg.selfplay_games = sp_games;
            pipeline::run_selfplay(cfg, out);
        } else if (tt->parsed()) {
            pipeline::run_train_teacher(base, out);
        } else if (ts->parsed()) {
            pipeline::run_train_students(base, out);
        } else if (tg->parsed()) {
            pipeline::run_train_gate(base, out);
        } else if (ex->parsed()) {
            const auto comma = ex_move.find(',');
            if (comma == std::string::npos) throw ConfigError("--move expects row,col");
            const int r = std::stoi(ex_move.substr(0, comma));
            const int c = std::stoi(ex_move.substr(comma + 1));
            const Tensor board = go::load_board_jsonl(ex_board);
            const auto res = pipeline::run_explain(base, out, board, r, c, parse_color(ex_color),
                                                   ex_id, ex_diag);
            std::cout << "teacher value " << res.teacher_pre << " -> " << res.teacher_post
                      << "\ncoarse lattice " << res.coarse.selected << ", fine lattice "
                      << res.fine.selected << "\n";
        } else if (ev->parsed()) {
            const auto report = pipeline::run_evaluate(base, ev_ann, ev_exp);
            fs::create_directories(out);
            pipeline::write_eval_report(out / "eval_report.json", report);
            std::cout << "mean jaccard " << report.mean_jaccard << " over "
                      << report.boards.size() << " boards\n";
            for (const auto& id : report.unmatched_annotations)
                std::cerr << "no explanation for annotated board " << id << "\n";
            for (const auto& id : report.unmatched_explanations)
                std::cerr << "no annotation for explained board " << id << "\n";
        } else if (rd->parsed()) {
            const auto map = collab::read_map_csv(rd_map);
            collab::write_heatmap_ppm(rd_out, map, 24, rd_grid);
        }
    } catch (const PrerequisiteMissing& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gocollab/collab.hpp"
#include "gocollab/config.hpp"
#include "gocollab/distill.hpp"
#include "gocollab/go/selfplay.hpp"
#include "gocollab/metrics.hpp"

namespace gocollab::pipeline {

namespace fs = std::filesystem;

// Artifact names inside an output directory.
struct Artifacts {
    fs::path dir;
    fs::path games() const { return dir / "games.jsonl"; }
    fs::path dataset() const { return dir / "dataset.jsonl"; }
    fs::path teacher_params() const { return dir / "teacher.params"; }
    fs::path teacher_loss() const { return dir / "teacher_loss.csv"; }
    fs::path student_params(const std::string& scale) const {
        return dir / ("student_" + scale + ".params");
    }
    fs::path student_loss(const std::string& scale) const {
        return dir / ("students_" + scale + "_loss.csv");
    }
    fs::path student_summary(const std::string& scale) const {
        return dir / ("students_" + scale + "_summary.json");
    }
    fs::path gate_params(const std::string& scale) const {
        return dir / ("gate_" + scale + ".params");
    }
    fs::path gate_loss(const std::string& scale) const {
        return dir / ("gate_" + scale + "_loss.csv");
    }
    fs::path gate_eval() const { return dir / "gates_eval.json"; }
    fs::path significance(const std::string& id, const std::string& scale) const {
        return dir / ("significance_" + id + "_" + scale + ".json");
    }
    fs::path map_csv(const std::string& id) const { return dir / ("map_" + id + ".csv"); }
    fs::path heatmap(const std::string& id) const { return dir / ("heatmap_" + id + ".ppm"); }
    fs::path explain_meta(const std::string& id) const { return dir / ("explain_" + id + ".json"); }
};

nn::NetworkSpec teacher_net(const RunConfig& cfg);
distill::StudentEnsemble coarse_ensemble(const RunConfig& cfg);
distill::StudentEnsemble fine_ensemble(const RunConfig& cfg);

void run_selfplay(const RunConfig& cfg, const fs::path& out_dir);
void run_train_teacher(const RunConfig& cfg, const fs::path& out_dir);
void run_train_students(const RunConfig& cfg, const fs::path& out_dir);
void run_train_gate(const RunConfig& cfg, const fs::path& out_dir);

struct ExplainResult {
    std::string board_id;
    double teacher_pre = 0.0, teacher_post = 0.0;
    distill::SignificanceReport coarse, fine;
    collab::CollabMap fused;
};

// Explains placing a `color` stone at (r, c) on `board` (2-plane encoding).
// Emits significance JSON per scale, the fused map CSV, a PPM heatmap and a
// meta JSON into out_dir. With `diagnostics`, also dumps the value net's
// per-layer contribution flow as CSV.
ExplainResult run_explain(const RunConfig& cfg, const fs::path& out_dir, const Tensor& board,
                          int r, int c, go::Cell color, const std::string& board_id,
                          bool diagnostics = false);

// Move-pair extraction used for gate training and for explanation probes.
std::vector<collab::MoveCase> move_cases_from_games(const std::vector<go::GameRecord>& records,
                                                    int cap, std::uint64_t seed);

metrics::EvalReport run_evaluate(const RunConfig& cfg, const fs::path& annotations_dir,
                                 const fs::path& explanations_dir);

void write_eval_report(const fs::path& path, const metrics::EvalReport& report);

}  // namespace gocollab::pipeline

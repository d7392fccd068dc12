#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gocollab/collab.hpp"
#include "gocollab/lattice.hpp"
#include "gocollab/nn/train.hpp"

namespace gocollab::distill {

using TeacherFn = std::function<double(const Tensor&)>;

// One shared student network applied to every lattice of a scale. All crops
// are rotated toward their board corner before entering the net, so the
// shared parameters see corner-anchored inputs.
struct StudentEnsemble {
    nn::NetworkSpec net;
    nn::Parameters params;
    std::vector<Lattice> lattices;
    std::string scale_tag;  // "coarse" / "fine"

    int lattice_count() const { return static_cast<int>(lattices.size()); }
    double student_output(int lattice_index, const Tensor& board) const;
};

// Mixture weights from the channel-concatenation of all (rotated) lattice
// crops; out_dim equals the lattice count.
struct GatingNet {
    nn::NetworkSpec net;
    nn::Parameters params;
};

StudentEnsemble make_student_ensemble(int board_h, int board_w, int lat_h, int lat_w,
                                      LatticeMode mode, int grid_n, int channels, int blocks,
                                      const std::string& scale_tag, Rng& rng);

GatingNet make_gating_net(const StudentEnsemble& ensemble, int channels, int blocks, Rng& rng);

Tensor gate_input(const StudentEnsemble& ensemble, const Tensor& board);
std::vector<double> gate_weights(const StudentEnsemble& ensemble, const GatingNet& gate,
                                 const Tensor& board);

struct StudentTrainResult {
    std::vector<double> epoch_loss;                    // over the lattice union
    std::vector<std::vector<double>> per_lattice_loss; // [epoch][lattice]
};

// Distills teacher outputs into the shared student: the training set is the
// union over lattices of (rotated crop, teacher(board)) pairs. With
// cfg.epochs == 0 the parameters are untouched and the initial per-lattice
// losses are reported.
StudentTrainResult train_students(const TeacherFn& teacher, StudentEnsemble& ensemble,
                                  const std::vector<Tensor>& boards, const nn::TrainConfig& cfg);

struct MixturePrediction {
    double y_mix = 0.0;
    std::vector<double> alpha;
    std::vector<double> y;
};

MixturePrediction mixture_predict(const StudentEnsemble& ensemble, const GatingNet& gate,
                                  const Tensor& board);

struct GateTrainResult {
    std::vector<double> epoch_loss;
    double heldout_loss = 0.0;
    double uniform_baseline_loss = 0.0;  // held-out loss at alpha_i = 1/n
    std::vector<double> heldout_residuals;  // |d_teacher - sum_i alpha_i d_y_i| per case
};

// Fits the gate so the mixture of student deltas reproduces the teacher's
// output delta across move cases. Students are frozen; their deltas are
// precomputed once. The last `heldout_frac` of a deterministic shuffle is
// held out for evaluation.
GateTrainResult train_gate(const TeacherFn& teacher, const StudentEnsemble& ensemble,
                           GatingNet& gate, const std::vector<collab::MoveCase>& move_cases,
                           const nn::TrainConfig& cfg, double heldout_frac = 0.2);

struct SignificanceReport {
    std::string scale;
    std::vector<double> scores;      // s_i = |alpha_i * (y_i(post) - y_i(pre))|
    std::vector<double> normalized;  // s_i / sum_j s_j; zeros when degenerate
    int selected = 0;                // argmax, ties to the lowest index
    bool degenerate = false;         // all scores zero
};

SignificanceReport significance_scores(const StudentEnsemble& ensemble, const GatingNet& gate,
                                       const collab::MoveCase& mcase);

// argmax lattice per scale; ties resolve to the lowest index.
std::pair<int, int> select_lattices(const SignificanceReport& coarse,
                                    const SignificanceReport& fine);

}  // namespace gocollab::distill

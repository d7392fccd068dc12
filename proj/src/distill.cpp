#include "gocollab/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gocollab/errors.hpp"

namespace gocollab::distill {

double StudentEnsemble::student_output(int lattice_index, const Tensor& board) const {
    const Lattice& lat = lattices[static_cast<std::size_t>(lattice_index)];
    const Tensor crop = crop_rotate(board, lat);
    return forward(net, params, crop).output();
}

StudentEnsemble make_student_ensemble(int board_h, int board_w, int lat_h, int lat_w,
                                      LatticeMode mode, int grid_n, int channels, int blocks,
                                      const std::string& scale_tag, Rng& rng) {
    StudentEnsemble e;
    e.lattices = make_lattices(board_h, board_w, lat_h, lat_w, mode, grid_n);
    // rotated crops of a square lattice are lat_h x lat_w either way
    e.net = nn::make_residual_net(lat_h, lat_w, 2, channels, blocks, 1, false);
    e.params = nn::init_params(e.net, rng);
    e.scale_tag = scale_tag;
    return e;
}

GatingNet make_gating_net(const StudentEnsemble& ensemble, int channels, int blocks, Rng& rng) {
    const int n = ensemble.lattice_count();
    if (n == 0) throw ConfigError("gating net needs at least one lattice");
    const Lattice& l0 = ensemble.lattices.front();
    GatingNet g;
    g.net = nn::make_residual_net(l0.h, l0.w, 2 * n, channels, blocks, n, false);
    g.params = nn::init_params(g.net, rng);
    return g;
}

Tensor gate_input(const StudentEnsemble& ensemble, const Tensor& board) {
    const int n = ensemble.lattice_count();
    const Lattice& l0 = ensemble.lattices.front();
    Tensor in = Tensor::zeros3(l0.h, l0.w, 2 * n);
    for (int i = 0; i < n; ++i) {
        const Tensor crop = crop_rotate(board, ensemble.lattices[static_cast<std::size_t>(i)]);
        if (crop.height() != l0.h || crop.width() != l0.w)
            throw ConfigError("lattice sizes differ within an ensemble");
        for (int r = 0; r < l0.h; ++r)
            for (int c = 0; c < l0.w; ++c)
                for (int ch = 0; ch < 2; ++ch)
                    in.at(r, c, 2 * i + ch) = crop.at(r, c, ch);
    }
    return in;
}

std::vector<double> gate_weights(const StudentEnsemble& ensemble, const GatingNet& gate,
                                 const Tensor& board) {
    const Tensor in = gate_input(ensemble, board);
    const nn::ForwardTrace tr = forward(gate.net, gate.params, in);
    const Tensor& out = tr.outputs.back();
    std::vector<double> alpha(out.flat().begin(), out.flat().end());
    return alpha;
}

StudentTrainResult train_students(const TeacherFn& teacher, StudentEnsemble& ensemble,
                                  const std::vector<Tensor>& boards, const nn::TrainConfig& cfg) {
    if (boards.empty()) throw ConfigError("train_students: no boards given");
    const int n = ensemble.lattice_count();

    // union of (rotated crop, teacher value) pairs across lattices
    std::vector<nn::Sample> samples;
    std::vector<int> lattice_of;
    samples.reserve(boards.size() * static_cast<std::size_t>(n));
    for (const Tensor& board : boards) {
        const double target = teacher(board);
        for (int i = 0; i < n; ++i) {
            nn::Sample s;
            s.input = crop_rotate(board, ensemble.lattices[static_cast<std::size_t>(i)]);
            s.target = target;
            samples.push_back(std::move(s));
            lattice_of.push_back(i);
        }
    }

    StudentTrainResult result;
    auto eval_per_lattice = [&]() {
        std::vector<double> loss(static_cast<std::size_t>(n), 0.0);
        std::vector<int> count(static_cast<std::size_t>(n), 0);
        for (std::size_t si = 0; si < samples.size(); ++si) {
            const double y = forward(ensemble.net, ensemble.params, samples[si].input).output();
            const double e = y - samples[si].target;
            loss[static_cast<std::size_t>(lattice_of[si])] += e * e;
            ++count[static_cast<std::size_t>(lattice_of[si])];
        }
        for (int i = 0; i < n; ++i)
            loss[static_cast<std::size_t>(i)] /= std::max(1, count[static_cast<std::size_t>(i)]);
        return loss;
    };

    if (cfg.epochs <= 0) {
        result.per_lattice_loss.push_back(eval_per_lattice());
        const auto& pl = result.per_lattice_loss.back();
        result.epoch_loss.push_back(std::accumulate(pl.begin(), pl.end(), 0.0) / n);
        return result;
    }

    if (cfg.bn_calibrate) nn::calibrate_batchnorm(ensemble.net, ensemble.params, samples);

    nn::TrainConfig inner = cfg;
    inner.epochs = 1;
    inner.bn_calibrate = false;
    double lr = cfg.learning_rate;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        inner.learning_rate = lr;
        inner.seed = cfg.seed + static_cast<std::uint64_t>(epoch) * 7919;
        inner.decay_every = 0;
        const nn::TrainResult tr = nn::train(ensemble.net, ensemble.params, samples, inner);
        result.epoch_loss.push_back(tr.epoch_loss.front());
        result.per_lattice_loss.push_back(eval_per_lattice());
        if (cfg.decay_every > 0 && epoch % cfg.decay_every == 0) lr *= cfg.decay_factor;
    }
    return result;
}

MixturePrediction mixture_predict(const StudentEnsemble& ensemble, const GatingNet& gate,
                                  const Tensor& board) {
    MixturePrediction p;
    p.alpha = gate_weights(ensemble, gate, board);
    p.y.resize(p.alpha.size());
    for (int i = 0; i < ensemble.lattice_count(); ++i)
        p.y[static_cast<std::size_t>(i)] = ensemble.student_output(i, board);
    p.y_mix = 0.0;
    for (std::size_t i = 0; i < p.alpha.size(); ++i) p.y_mix += p.alpha[i] * p.y[i];
    return p;
}

GateTrainResult train_gate(const TeacherFn& teacher, const StudentEnsemble& ensemble,
                           GatingNet& gate, const std::vector<collab::MoveCase>& move_cases,
                           const nn::TrainConfig& cfg, double heldout_frac) {
    if (move_cases.empty()) throw ConfigError("train_gate: no move cases given");
    const int n = ensemble.lattice_count();

    struct Case {
        Tensor gate_in;             // from the post-move board
        double d_teacher = 0.0;     // teacher(post) - teacher(pre)
        std::vector<double> d_y;    // per-lattice student deltas
    };
    std::vector<Case> cases;
    cases.reserve(move_cases.size());
    for (const collab::MoveCase& mc : move_cases) {
        Case c;
        c.gate_in = gate_input(ensemble, mc.post_board);
        c.d_teacher = teacher(mc.post_board) - teacher(mc.pre_board);
        c.d_y.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            c.d_y[static_cast<std::size_t>(i)] =
                ensemble.student_output(i, mc.post_board) - ensemble.student_output(i, mc.pre_board);
        cases.push_back(std::move(c));
    }

    // deterministic split
    Rng split_rng(cfg.seed ^ 0xfeedf00dull);
    std::vector<std::size_t> order(cases.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    split_rng.shuffle(order);
    const std::size_t heldout_n =
        std::min(cases.size() > 1 ? cases.size() - 1 : std::size_t{0},
                 static_cast<std::size_t>(std::floor(heldout_frac * static_cast<double>(cases.size()))));
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(heldout_n));
    std::vector<std::size_t> held_idx(order.end() - static_cast<std::ptrdiff_t>(heldout_n), order.end());

    auto case_residual = [&](const Case& c, const std::vector<double>& alpha) {
        double mix = 0.0;
        for (int i = 0; i < n; ++i)
            mix += alpha[static_cast<std::size_t>(i)] * c.d_y[static_cast<std::size_t>(i)];
        return c.d_teacher - mix;
    };
    GateTrainResult result;
    Rng rng(cfg.seed);
    nn::SgdState sgd;
    sgd.init_like(gate.params);
    double lr = cfg.learning_rate;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);
        double loss_sum = 0.0;
        for (std::size_t ci : train_idx) {
            const Case& c = cases[ci];
            const nn::ForwardTrace tr = forward(gate.net, gate.params, c.gate_in);
            const Tensor& alpha_t = tr.outputs.back();
            double mix = 0.0;
            for (int i = 0; i < n; ++i)
                mix += alpha_t.at(i) * c.d_y[static_cast<std::size_t>(i)];
            const double resid = c.d_teacher - mix;
            loss_sum += resid * resid;
            // d(resid^2)/d(alpha_i) = -2 * resid * d_y_i
            Tensor d_alpha = Tensor::zeros1(n);
            for (int i = 0; i < n; ++i)
                d_alpha.at(i) = -2.0 * resid * c.d_y[static_cast<std::size_t>(i)];
            const nn::Gradients g = backward_gradients(gate.net, gate.params, tr, d_alpha);
            sgd.step(gate.params, g, lr, cfg.momentum, cfg.grad_clip);
        }
        const double epoch_loss = loss_sum / static_cast<double>(train_idx.size());
        if (!std::isfinite(epoch_loss))
            throw TrainingDiverged("gate loss became non-finite at epoch " + std::to_string(epoch));
        result.epoch_loss.push_back(epoch_loss);
        if (cfg.decay_every > 0 && epoch % cfg.decay_every == 0) lr *= cfg.decay_factor;
    }

    // held-out evaluation (training set when no case could be held out)
    const std::vector<std::size_t>& eval_idx = held_idx.empty() ? train_idx : held_idx;
    const std::vector<double> uni(static_cast<std::size_t>(n), 1.0 / n);
    double trained_total = 0.0, uniform_total = 0.0;
    for (std::size_t i : eval_idx) {
        const Case& c = cases[i];
        std::vector<double> alpha(static_cast<std::size_t>(n));
        const nn::ForwardTrace tr = forward(gate.net, gate.params, c.gate_in);
        for (int k = 0; k < n; ++k) alpha[static_cast<std::size_t>(k)] = tr.outputs.back().at(k);
        const double r = case_residual(c, alpha);
        trained_total += r * r;
        result.heldout_residuals.push_back(std::abs(r));
        const double ru = case_residual(c, uni);
        uniform_total += ru * ru;
    }
    result.heldout_loss = trained_total / static_cast<double>(eval_idx.size());
    result.uniform_baseline_loss = uniform_total / static_cast<double>(eval_idx.size());
    return result;
}

SignificanceReport significance_scores(const StudentEnsemble& ensemble, const GatingNet& gate,
                                       const collab::MoveCase& mcase) {
    mcase.validate();
    const int n = ensemble.lattice_count();
    SignificanceReport rep;
    rep.scale = ensemble.scale_tag;
    const std::vector<double> alpha = gate_weights(ensemble, gate, mcase.post_board);
    rep.scores.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double dy = ensemble.student_output(i, mcase.post_board) -
                          ensemble.student_output(i, mcase.pre_board);
        rep.scores[static_cast<std::size_t>(i)] = std::abs(alpha[static_cast<std::size_t>(i)] * dy);
    }
    const double total = std::accumulate(rep.scores.begin(), rep.scores.end(), 0.0);
    rep.normalized.assign(static_cast<std::size_t>(n), 0.0);
    if (total > 0.0) {
        for (int i = 0; i < n; ++i)
            rep.normalized[static_cast<std::size_t>(i)] = rep.scores[static_cast<std::size_t>(i)] / total;
    } else {
        rep.degenerate = true;
    }
    rep.selected = static_cast<int>(
        std::max_element(rep.scores.begin(), rep.scores.end()) - rep.scores.begin());
    return rep;
}

std::pair<int, int> select_lattices(const SignificanceReport& coarse,
                                    const SignificanceReport& fine) {
    return {coarse.selected, fine.selected};
}

}  // namespace gocollab::distill

#include "gocollab/go/selfplay.hpp"

#include <fstream>

#include <json.hpp>

#include "gocollab/errors.hpp"

namespace gocollab::go {

using nlohmann::json;

void GameRecord::replay() {
    states.clear();
    GameState s = GameState::empty(h, w);
    for (const Move& m : moves) {
        s = apply_move(s, m);
        states.push_back(s);
    }
}

Policy policy_from_string(const std::string& name) {
    if (name == "random") return Policy::RandomLegal;
    if (name == "greedy-capture") return Policy::GreedyCapture;
    throw ConfigError("unknown selfplay policy: " + name);
}

namespace {

// A point is treated as the mover's own eye if all orthogonal neighbours are
// own stones; random play never fills those so games terminate.
bool is_own_eye(const GameState& s, int r, int c) {
    for (const auto& d : {std::array<int, 2>{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const int nr = r + d[0], nc = c + d[1];
        if (!s.on_board(nr, nc)) continue;
        if (s.at(nr, nc) != s.to_move) return false;
    }
    return true;
}

Move pick_move(const GameState& s, Policy policy, Rng& rng) {
    std::vector<Move> candidates;
    for (int r = 0; r < s.h; ++r)
        for (int c = 0; c < s.w; ++c) {
            const Move m{r, c};
            if (!is_own_eye(s, r, c) && is_legal(s, m)) candidates.push_back(m);
        }
    if (candidates.empty()) return Move::pass();
    if (policy == Policy::RandomLegal)
        return candidates[static_cast<std::size_t>(rng.below_int(static_cast<int>(candidates.size())))];

    // greedy capture: largest immediate capture, uniform among maxima
    int best = -1;
    std::vector<Move> best_moves;
    for (const Move& m : candidates) {
        const int caps = capture_count(s, m);
        if (caps > best) {
            best = caps;
            best_moves.assign(1, m);
        } else if (caps == best) {
            best_moves.push_back(m);
        }
    }
    return best_moves[static_cast<std::size_t>(rng.below_int(static_cast<int>(best_moves.size())))];
}

}  // namespace

std::vector<GameRecord> selfplay_generate(int n_games, Policy policy, std::uint64_t seed,
                                          int h, int w, int max_moves) {
    if (max_moves <= 0) max_moves = 4 * h * w;
    std::vector<GameRecord> records(static_cast<std::size_t>(std::max(n_games, 0)));
#pragma omp parallel for schedule(dynamic)
    for (int gi = 0; gi < n_games; ++gi) {
        // per-game stream: deterministic regardless of scheduling
        Rng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(gi) + 1);
        GameRecord& rec = records[static_cast<std::size_t>(gi)];
        rec.h = h;
        rec.w = w;
        GameState s = GameState::empty(h, w);
        while (!s.game_over() && s.move_count < max_moves) {
            const Move m = pick_move(s, policy, rng);
            s = apply_move(s, m);
            rec.moves.push_back(m);
            rec.states.push_back(s);
        }
        rec.outcome = score_outcome(s);
    }
    return records;
}

std::vector<nn::Sample> dataset_from_records(const std::vector<GameRecord>& records,
                                             int cap, std::uint64_t seed) {
    std::vector<nn::Sample> samples;
    for (const GameRecord& rec : records) {
        for (const GameState& s : rec.states) {
            nn::Sample smp;
            smp.input = encode_state(s);
            smp.target = static_cast<double>(rec.outcome);
            samples.push_back(std::move(smp));
        }
    }
    if (cap > 0 && static_cast<int>(samples.size()) > cap) {
        Rng rng(seed);
        rng.shuffle(samples);
        samples.resize(static_cast<std::size_t>(cap));
    }
    return samples;
}

void save_games_jsonl(const std::filesystem::path& path, const std::vector<GameRecord>& records) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    for (const GameRecord& rec : records) {
        json j;
        j["h"] = rec.h;
        j["w"] = rec.w;
        json moves = json::array();
        for (const Move& m : rec.moves) moves.push_back({m.r, m.c});
        j["moves"] = std::move(moves);
        j["outcome"] = rec.outcome;
        os << j.dump() << "\n";
    }
}

std::vector<GameRecord> load_games_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open game file " + path.string());
    std::vector<GameRecord> records;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError("malformed JSON line in " + path.string());
        GameRecord rec;
        rec.h = j.at("h").get<int>();
        rec.w = j.at("w").get<int>();
        for (const auto& mv : j.at("moves")) rec.moves.push_back(Move{mv.at(0), mv.at(1)});
        rec.outcome = j.at("outcome").get<int>();
        rec.replay();
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

json board_to_json(const Tensor& planes) {
    json rows = json::array();
    for (int r = 0; r < planes.height(); ++r) {
        json row = json::array();
        for (int c = 0; c < planes.width(); ++c) {
            int v = 0;
            if (planes.at(r, c, 0) != 0.0) v = 1;
            if (planes.at(r, c, 1) != 0.0) v = 2;
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Tensor board_from_json(const json& rows) {
    const int h = static_cast<int>(rows.size());
    if (h == 0) throw IoError("board record has no rows");
    const int w = static_cast<int>(rows.at(0).size());
    Tensor t = Tensor::zeros3(h, w, 2);
    for (int r = 0; r < h; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<int>(row.size()) != w) throw IoError("ragged board rows");
        for (int c = 0; c < w; ++c) {
            const int v = row.at(static_cast<std::size_t>(c)).get<int>();
            if (v == 1) t.at(r, c, 0) = 1.0;
            else if (v == 2) t.at(r, c, 1) = 1.0;
            else if (v != 0) throw IoError("board cells must be 0, 1 or 2");
        }
    }
    return t;
}

}  // namespace

void save_dataset_jsonl(const std::filesystem::path& path, const std::vector<nn::Sample>& samples) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    for (const nn::Sample& s : samples) {
        json j;
        j["board"] = board_to_json(s.input);
        j["value"] = s.target;
        os << j.dump() << "\n";
    }
}

std::vector<nn::Sample> load_dataset_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open dataset " + path.string());
    std::vector<nn::Sample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError("malformed JSON at " + path.string() + ":" + std::to_string(line_no));
        nn::Sample s;
        s.input = board_from_json(j.at("board"));
        s.target = j.at("value").get<double>();
        samples.push_back(std::move(s));
    }
    return samples;
}

Tensor load_board_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open board file " + path.string());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError("malformed JSON in " + path.string());
        return board_from_json(j.at("board"));
    }
    throw IoError("no board record in " + path.string());
}

}  // namespace gocollab::go

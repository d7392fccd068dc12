#include "gocollab/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gocollab/errors.hpp"

namespace gocollab::metrics {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

AnnotationSet load_annotations(const std::filesystem::path& path, int board_h, int board_w) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open annotation file " + path.string());
    AnnotationSet set;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv(line);
        if (line_no == 1 && fields.size() == 2 && fields[0] == "rating") {
            int rating = 0;
            try {
                rating = std::stoi(fields[1]);
            } catch (...) {
                fail("rating is not an integer");
            }
            if (rating < 1 || rating > 5) fail("rating must be in 1..5");
            set.rating = rating;
            continue;
        }
        if (fields.size() != 4) fail("expected board_id,row,col,strength");
        int row = 0, col = 0;
        double strength = 0.0;
        try {
            row = std::stoi(fields[1]);
            col = std::stoi(fields[2]);
            strength = std::stod(fields[3]);
        } catch (...) {
            fail("malformed numeric field");
        }
        if (set.board_id.empty())
            set.board_id = fields[0];
        else if (set.board_id != fields[0])
            fail("mixed board ids in one file");
        if (row < 0 || row >= board_h || col < 0 || col >= board_w)
            fail("coordinate off the board");
        if (strength < 0.0) fail("negative collaboration strength");
        set.entries.push_back({row, col, strength});
    }
    if (set.entries.empty()) throw IoError(path.string() + ": no annotation rows");
    return set;
}

std::vector<double> collab_strengths(const collab::ScoreGrid& map,
                                     std::span<const std::pair<int, int>> stones) {
    if (stones.empty()) throw ConfigError("collab_strengths: empty stone set");
    std::vector<double> q;
    q.reserve(stones.size());
    for (const auto& [r, c] : stones) {
        if (r < 0 || r >= map.h || c < 0 || c >= map.w)
            throw ConfigError("collab_strengths: stone off the map");
        q.push_back(std::abs(map.at(r, c)));
    }
    return q;
}

std::vector<double> normalize_dist(std::span<const double> p) {
    double total = 0.0;
    for (double v : p) {
        if (v < 0.0) throw ConfigError("normalize_dist: negative entry");
        total += v;
    }
    if (total <= 0.0) throw ConfigError("normalize_dist: all-zero vector");
    std::vector<double> out(p.begin(), p.end());
    for (double& v : out) v /= total;
    return out;
}

double weighted_jaccard(std::span<const double> p_hat, std::span<const double> q_hat) {
    if (p_hat.size() != q_hat.size())
        throw ConfigError("weighted_jaccard: support index sets differ");
    double sp = 0.0, sq = 0.0;
    for (double v : p_hat) sp += v;
    for (double v : q_hat) sq += v;
    constexpr double tol = 1e-9;
    if (std::abs(sp - 1.0) > tol || std::abs(sq - 1.0) > tol)
        throw ConfigError("weighted_jaccard: inputs must be normalized distributions");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        num += std::min(p_hat[i], q_hat[i]);
        den += std::max(p_hat[i], q_hat[i]);
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace gocollab::metrics

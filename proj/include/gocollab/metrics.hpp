#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gocollab/collab.hpp"
#include "gocollab/go/board.hpp"

namespace gocollab::metrics {

struct Annotation {
    int row = 0, col = 0;
    double strength = 0.0;
};

struct AnnotationSet {
    std::string board_id;
    std::vector<Annotation> entries;
    std::optional<int> rating;  // 1..5
};

// CSV with columns board_id,row,col,strength and an optional leading line
// "rating,<1-5>". Rejects negative strengths and off-board coordinates with
// the offending row number.
AnnotationSet load_annotations(const std::filesystem::path& path, int board_h, int board_w);

// q_v = |map_v| restricted to the given stone coordinates.
std::vector<double> collab_strengths(const collab::ScoreGrid& map,
                                     std::span<const std::pair<int, int>> stones);

// p_hat = p / sum(p). Throws on an all-zero vector.
std::vector<double> normalize_dist(std::span<const double> p);

// Weighted Jaccard sum(min) / sum(max) over two normalized non-negative
// vectors on the same support index set. 1 iff identical, 0 iff supports are
// disjoint. Rejects unnormalized input.
double weighted_jaccard(std::span<const double> p_hat, std::span<const double> q_hat);

struct BoardEval {
    std::string board_id;
    double jaccard = 0.0;
    int n_stones = 0;
    std::optional<int> rating;
};

struct EvalReport {
    std::vector<BoardEval> boards;
    double mean_jaccard = 0.0;
    std::optional<double> mean_rating;
    std::vector<std::string> unmatched_annotations;
    std::vector<std::string> unmatched_explanations;
};

}  // namespace gocollab::metrics

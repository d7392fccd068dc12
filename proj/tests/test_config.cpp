#include <doctest.h>

#include "gocollab/config.hpp"
#include "gocollab/errors.hpp"

using namespace gocollab;

TEST_CASE("config parses key = value lines with comments") {
    const RunConfig cfg = parse_config_text(
        "# comment\n"
        "board_size = 7\n"
        "teacher_channels = 12   # trailing comment\n"
        "collab_layers = 1,3\n"
        "seed = 42\n"
        "teacher_sigmoid = false\n");
    CHECK(cfg.board_size == 7);
    CHECK(cfg.teacher_channels == 12);
    CHECK(cfg.collab_layers == std::vector<int>{1, 3});
    CHECK(cfg.seed == 42);
    CHECK(!cfg.teacher_sigmoid);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    CHECK_THROWS_AS(parse_config_text("no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("board_size = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("board_size 9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("board_size = 1\n"), ConfigError);  // validation
    CHECK_THROWS_AS(parse_config_text("coarse_lattice = 99\n"), ConfigError);
}

TEST_CASE("serialization round-trips and is byte-stable") {
    RunConfig cfg;
    cfg.board_size = 9;
    cfg.seed = 123;
    cfg.collab_layers = {1, 3, 5};
    const std::string text = config_to_text(cfg);
    const RunConfig back = parse_config_text(text);
    CHECK(config_to_text(back) == text);
    CHECK(back.seed == 123);
    CHECK(back.collab_layers == cfg.collab_layers);
}

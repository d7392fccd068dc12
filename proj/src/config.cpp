#include "gocollab/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gocollab/errors.hpp"

namespace gocollab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::map<std::string, Field> field_table() {
    std::map<std::string, Field> t;
    auto add_int = [&](const std::string& key, int RunConfig::* member) {
        t[key] = {[member, key](RunConfig& c, const std::string& v) {
                      try {
                          c.*member = std::stoi(v);
                      } catch (...) {
                          throw ConfigError(key + ": expected an integer, got '" + v + "'");
                      }
                  },
                  [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    auto add_double = [&](const std::string& key, double RunConfig::* member) {
        t[key] = {[member, key](RunConfig& c, const std::string& v) {
                      try {
                          c.*member = std::stod(v);
                      } catch (...) {
                          throw ConfigError(key + ": expected a number, got '" + v + "'");
                      }
                  },
                  [member](const RunConfig& c) { return fmt_double(c.*member); }};
    };
    auto add_bool = [&](const std::string& key, bool RunConfig::* member) {
        t[key] = {[member, key](RunConfig& c, const std::string& v) {
                      if (v == "true" || v == "1")
                          c.*member = true;
                      else if (v == "false" || v == "0")
                          c.*member = false;
                      else
                          throw ConfigError(key + ": expected true/false, got '" + v + "'");
                  },
                  [member](const RunConfig& c) { return (c.*member) ? "true" : "false"; }};
    };
    auto add_string = [&](const std::string& key, std::string RunConfig::* member) {
        t[key] = {[member](RunConfig& c, const std::string& v) { c.*member = v; },
                  [member](const RunConfig& c) { return c.*member; }};
    };

    add_int("board_size", &RunConfig::board_size);
    add_int("coarse_lattice", &RunConfig::coarse_lattice);
    add_int("fine_lattice", &RunConfig::fine_lattice);
    add_int("fine_grid", &RunConfig::fine_grid);
    add_int("teacher_channels", &RunConfig::teacher_channels);
    add_int("teacher_blocks", &RunConfig::teacher_blocks);
    add_bool("teacher_sigmoid", &RunConfig::teacher_sigmoid);
    add_int("student_channels", &RunConfig::student_channels);
    add_int("student_blocks", &RunConfig::student_blocks);
    add_int("gate_channels", &RunConfig::gate_channels);
    add_int("gate_blocks", &RunConfig::gate_blocks);
    add_int("selfplay_games", &RunConfig::selfplay_games);
    add_string("selfplay_policy", &RunConfig::selfplay_policy);
    add_int("selfplay_max_moves", &RunConfig::selfplay_max_moves);
    add_int("teacher_epochs", &RunConfig::teacher_epochs);
    add_double("teacher_lr", &RunConfig::teacher_lr);
    add_int("teacher_sample_cap", &RunConfig::teacher_sample_cap);
    add_int("student_epochs", &RunConfig::student_epochs);
    add_double("student_lr", &RunConfig::student_lr);
    add_int("student_board_cap", &RunConfig::student_board_cap);
    add_int("gate_epochs", &RunConfig::gate_epochs);
    add_double("gate_lr", &RunConfig::gate_lr);
    add_int("gate_pair_cap", &RunConfig::gate_pair_cap);
    add_double("gate_heldout_frac", &RunConfig::gate_heldout_frac);
    add_double("momentum", &RunConfig::momentum);
    add_int("decay_every", &RunConfig::decay_every);
    add_double("decay_factor", &RunConfig::decay_factor);
    add_double("activation_eps", &RunConfig::activation_eps);

    t["collab_layers"] = {
        [](RunConfig& c, const std::string& v) {
            c.collab_layers.clear();
            std::istringstream ss(v);
            std::string part;
            while (std::getline(ss, part, ',')) {
                part = trim(part);
                if (part.empty()) continue;
                try {
                    c.collab_layers.push_back(std::stoi(part));
                } catch (...) {
                    throw ConfigError("collab_layers: expected comma-separated integers");
                }
            }
            if (c.collab_layers.empty())
                throw ConfigError("collab_layers: at least one layer required");
        },
        [](const RunConfig& c) {
            std::string out;
            for (std::size_t i = 0; i < c.collab_layers.size(); ++i) {
                if (i) out += ",";
                out += std::to_string(c.collab_layers[i]);
            }
            return out;
        }};
    t["seed"] = {[](RunConfig& c, const std::string& v) {
                     try {
                         c.seed = std::stoull(v);
                     } catch (...) {
                         throw ConfigError("seed: expected an unsigned integer");
                     }
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }};
    return t;
}

// fixed emission order for canonical snapshots
const char* kKeyOrder[] = {
    "board_size", "coarse_lattice", "fine_lattice", "fine_grid",
    "teacher_channels", "teacher_blocks", "teacher_sigmoid",
    "student_channels", "student_blocks", "gate_channels", "gate_blocks",
    "selfplay_games", "selfplay_policy", "selfplay_max_moves",
    "teacher_epochs", "teacher_lr", "teacher_sample_cap",
    "student_epochs", "student_lr", "student_board_cap",
    "gate_epochs", "gate_lr", "gate_pair_cap", "gate_heldout_frac",
    "momentum", "decay_every", "decay_factor",
    "collab_layers", "activation_eps", "seed",
};

}  // namespace

void RunConfig::validate() const {
    if (board_size < 3) throw ConfigError("board_size must be at least 3");
    if (coarse_lattice <= 0 || coarse_lattice > board_size)
        throw ConfigError("coarse_lattice must fit the board");
    if (fine_lattice <= 0 || fine_lattice > board_size)
        throw ConfigError("fine_lattice must fit the board");
    if (fine_grid < 1) throw ConfigError("fine_grid must be at least 1");
    if (teacher_channels < 1 || student_channels < 1 || gate_channels < 1)
        throw ConfigError("channel counts must be positive");
    if (teacher_blocks < 1 || student_blocks < 1 || gate_blocks < 1)
        throw ConfigError("block counts must be positive");
    if (selfplay_games < 0) throw ConfigError("selfplay_games must be non-negative");
    if (gate_heldout_frac < 0.0 || gate_heldout_frac >= 1.0)
        throw ConfigError("gate_heldout_frac must be in [0, 1)");
    if (collab_layers.empty()) throw ConfigError("collab_layers must not be empty");
    for (int l : collab_layers)
        if (l < 1) throw ConfigError("collab_layers entries are 1-based conv ordinals");
    if (activation_eps <= 0.0) throw ConfigError("activation_eps must be positive");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    const auto table = field_table();
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second.set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string config_to_text(const RunConfig& cfg) {
    const auto table = field_table();
    std::ostringstream os;
    for (const char* key : kKeyOrder) {
        os << key << " = " << table.at(key).get(cfg) << "\n";
    }
    return os.str();
}

void write_config_snapshot(const std::filesystem::path& out_dir, const RunConfig& cfg) {
    std::ofstream os(out_dir / "config_used.cfg", std::ios::trunc);
    if (!os) throw IoError("cannot write config snapshot in " + out_dir.string());
    os << config_to_text(cfg);
}

}  // namespace gocollab

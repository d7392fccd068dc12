#pragma once

#include <stdexcept>
#include <string>

namespace gocollab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllegalMove : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a pipeline command is missing an input artifact; the CLI maps
// this to exit code 2 and prints the offending path.
struct PrerequisiteMissing : std::runtime_error {
    std::string path;
    explicit PrerequisiteMissing(const std::string& p)
        : std::runtime_error("missing prerequisite artifact: " + p), path(p) {}
};

}  // namespace gocollab

#pragma once

#include <stdexcept>
#include <string>

namespace jgen {

// Error classes map 1:1 onto CLI exit codes (see tools/journeygen_main.cpp).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataFormatError : std::runtime_error {
    explicit DataFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingDivergenceError : std::runtime_error {
    explicit TrainingDivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jgen

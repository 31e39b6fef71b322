#pragma once

#include <stdexcept>
#include <string>

namespace pcx {

// Precondition violations: bad shapes, invalid labels, empty inputs.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// NaN/Inf produced or consumed where finite values are required.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (OFF meshes, spec files). Carries a line number when known.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Checkpoint problems: bad magic, truncation, wrong version, config mismatch.
class checkpoint_error : public std::runtime_error {
public:
    explicit checkpoint_error(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI misuse; maps to exit code 2.
class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcx

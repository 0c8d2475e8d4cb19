#pragma once

#include <stdexcept>
#include <string>

namespace ugcqa {

// Bad inputs: malformed files, violated invariants, contract misuse.
// CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures discovered while computing: degenerate fits,
// non-convergence, inconsistent intermediate state. CLI exit code 2.
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ugcqa

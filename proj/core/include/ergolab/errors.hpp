#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

/// Bad user input: malformed config files, out-of-range parameters,
/// invalid layer specs. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Value outside the operation's domain at runtime (non-positive wealth,
/// fraction outside [0,1], log of a non-positive argument). Exit code 1.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension mismatch between networks, caches, gradients or grids.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Regression could not identify its parameters (e.g. constant data).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss or parameter; carries the episode
/// at which divergence was detected.
class TrainingDivergedError : public NumericError {
public:
    TrainingDivergedError(const std::string& what, long episode)
        : NumericError(what), episode_(episode) {}
    long episode() const { return episode_; }

private:
    long episode_;
};

}  // namespace ergolab

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lnn {

/// Malformed or inconsistent input data (files, triples, indices).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or contradictory configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during training or prediction.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what, int phase = 0, std::size_t epoch = 0)
        : std::runtime_error(what), phase_(phase), epoch_(epoch) {}

    int phase() const noexcept { return phase_; }
    std::size_t epoch() const noexcept { return epoch_; }

private:
    int phase_;
    std::size_t epoch_;
};

/// Raised by weighted_mode when no neighbor contributed any weight.
class NoEligibleNeighbors : public std::runtime_error {
public:
    NoEligibleNeighbors() : std::runtime_error("no eligible neighbors") {}
};

} // namespace lnn

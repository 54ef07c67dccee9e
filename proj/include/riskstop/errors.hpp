#pragma once

#include <stdexcept>
#include <string>

namespace riskstop {

// Fixed-point iteration requires P(interarrival > horizon) > 0.
class NonContractiveError : public std::runtime_error {
public:
    explicit NonContractiveError(const std::string& msg) : std::runtime_error(msg) {}
};

class MaxIterationsError : public std::runtime_error {
public:
    explicit MaxIterationsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Policy grids do not cover the state reached by a trajectory.
class PolicyMismatchError : public std::runtime_error {
public:
    explicit PolicyMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Policy artifacts were produced under a different configuration.
class HashMismatchError : public std::runtime_error {
public:
    explicit HashMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure rate f(y)/survival(y) requested where survival(y) = 0.
class HazardUndefinedError : public std::runtime_error {
public:
    explicit HazardUndefinedError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace riskstop

#pragma once

#include <stdexcept>
#include <string>

namespace gf {

// Raised when an argument is outside the domain of an operation (x <= 0, x < z, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Raised when a computed quantity is a genuine +infinity (divergent moment or
// kernel integral). Carries the name of the offending quantity.
class InfinityResult : public std::runtime_error {
public:
    explicit InfinityResult(const std::string& what) : std::runtime_error(what) {}
};

// Raised when the growth flow reaches its finite explosion time.
class FlowExplosion : public std::runtime_error {
public:
    FlowExplosion(const std::string& what, double explosion_time)
        : std::runtime_error(what), explosion_time_(explosion_time) {}
    double explosion_time() const { return explosion_time_; }

private:
    double explosion_time_;
};

// Raised when the simulation detects an inconsistency with the standing
// assumptions (e.g. the jump hazard stays bounded while the flow explodes).
class ModelInconsistency : public std::runtime_error {
public:
    explicit ModelInconsistency(const std::string& what) : std::runtime_error(what) {}
};

// Raised for kernels that never truly fragment (all mass at y = 1).
class DegenerateKernel : public std::runtime_error {
public:
    explicit DegenerateKernel(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a configuration cannot be parsed or fails validation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gf

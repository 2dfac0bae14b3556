#pragma once

#include <stdexcept>
#include <string>

namespace tcmem {

// Base error carrying the process exit code the CLI maps it to:
// 2 = usage/config error, 3 = numerical/diagnostic error.
class error : public std::runtime_error {
public:
    error(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

// Invalid model parameters (non-positive coupling, bad sizes, bad index).
class invalid_model : public error {
public:
    explicit invalid_model(const std::string& msg) : error(msg, 2) {}
};

// Invalid configuration or argument outside model construction.
class invalid_config : public error {
public:
    explicit invalid_config(const std::string& msg) : error(msg, 2) {}
};

// Problem size exceeds a documented cap (e.g. brute-force qubit limit).
class resource_limit : public error {
public:
    explicit resource_limit(const std::string& msg) : error(msg, 2) {}
};

// Numerical failure: eigensolver non-convergence, invariant violation, ...
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& msg) : error(msg, 3) {}
};

// Singular covariance factor in the Gaussian overlap formula.
class singular_covariance : public numerical_error {
public:
    explicit singular_covariance(const std::string& msg) : numerical_error(msg) {}
};

// The sector-phase ratio is undefined because an overlap magnitude vanishes.
class undefined_phase : public numerical_error {
public:
    explicit undefined_phase(const std::string& msg) : numerical_error(msg) {}
};

}  // namespace tcmem

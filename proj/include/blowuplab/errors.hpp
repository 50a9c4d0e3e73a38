#pragma once

#include <stdexcept>
#include <string>

namespace blowuplab {

// Exit codes surfaced by the command-line front end.
enum class ExitCode : int { ok = 0, numerical = 1, config = 2, budget = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

// Parameters outside the admissible soliton domain (|d| < 1, nu > -1 + |d|).
class DomainError : public ConfigError {
public:
    explicit DomainError(const std::string& what) : ConfigError(what) {}
};

class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(ExitCode::budget, what) {}
};

}  // namespace blowuplab

#pragma once

#include <stdexcept>
#include <string>

namespace kerrpo {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    kSuccess = 0,
    kInvalidParameters = 2,
    kConvergenceFailure = 3,
    kUnitarityBreach = 4,
};

// Base of every library error. Each subclass carries the exit code the CLI
// reports when the error escapes a run.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
    ExitCode exit_code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what) : Error(what, ExitCode::kInvalidParameters) {}
};

// Operation evaluated outside its mathematical domain (e.g. closed form used with chi != 0).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what, ExitCode::kInvalidParameters) {}
};

class IntegrationFailure : public Error {
public:
    explicit IntegrationFailure(const std::string& what) : Error(what, ExitCode::kConvergenceFailure) {}
};

class SqueezeOverflow : public Error {
public:
    explicit SqueezeOverflow(const std::string& what) : Error(what, ExitCode::kConvergenceFailure) {}
};

class SeriesDivergence : public Error {
public:
    explicit SeriesDivergence(const std::string& what) : Error(what, ExitCode::kConvergenceFailure) {}
};

class TruncationTooSmall : public Error {
public:
    explicit TruncationTooSmall(const std::string& what) : Error(what, ExitCode::kConvergenceFailure) {}
};

class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what) : Error(what, ExitCode::kConvergenceFailure) {}
};

class UnitarityBreach : public Error {
public:
    explicit UnitarityBreach(const std::string& what) : Error(what, ExitCode::kUnitarityBreach) {}
};

class NormDrift : public Error {
public:
    explicit NormDrift(const std::string& what) : Error(what, ExitCode::kUnitarityBreach) {}
};

}  // namespace kerrpo

#pragma once

#include <stdexcept>
#include <string>

namespace levyflow {

/// Failure categories. Each maps onto one CLI exit status.
enum class ErrorKind {
    Config,        ///< malformed or unknown configuration
    Admissibility, ///< model/parameters outside the theory's admissible range
    Numeric,       ///< non-convergence, quadrature failure, search failure
    Io,
};

/// Exit status used by the CLI for each error category.
constexpr int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Admissibility: return 3;
        case ErrorKind::Numeric: return 4;
        case ErrorKind::Io: return 5;
    }
    return 4;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

#define LEVYFLOW_DEFINE_ERROR(Type, Kind)                                        \
    class Type : public Error {                                                  \
    public:                                                                      \
        explicit Type(const std::string& what) : Error(ErrorKind::Kind, #Type, what) {} \
    };

LEVYFLOW_DEFINE_ERROR(ConfigError, Config)
LEVYFLOW_DEFINE_ERROR(InvalidParameter, Config)
LEVYFLOW_DEFINE_ERROR(UnsupportedModel, Admissibility)
LEVYFLOW_DEFINE_ERROR(InadmissibleModel, Admissibility)
LEVYFLOW_DEFINE_ERROR(QuadratureFailure, Numeric)
LEVYFLOW_DEFINE_ERROR(EnvelopeFailure, Numeric)
LEVYFLOW_DEFINE_ERROR(InsufficientDecades, Config)
LEVYFLOW_DEFINE_ERROR(NoConvergence, Numeric)
LEVYFLOW_DEFINE_ERROR(LambdaSearchFailure, Numeric)
LEVYFLOW_DEFINE_ERROR(R0SearchFailure, Numeric)
LEVYFLOW_DEFINE_ERROR(InverseNoConvergence, Numeric)
LEVYFLOW_DEFINE_ERROR(StateEscape, Numeric)
LEVYFLOW_DEFINE_ERROR(IoError, Io)

#undef LEVYFLOW_DEFINE_ERROR

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidParameter(what);
}

} // namespace levyflow

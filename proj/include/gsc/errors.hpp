#ifndef GSC_ERRORS_HPP
#define GSC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gsc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureFailure : Error { using Error::Error; };
struct HypothesisViolation : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct ResidualTooLarge : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct ToleranceUnreachable : Error { using Error::Error; };
struct StripViolated : Error { using Error::Error; };
struct ConeViolated : Error { using Error::Error; };
struct DegenerateSequence : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace gsc

#endif

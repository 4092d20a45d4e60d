#pragma once
#include <stdexcept>
#include <string>

namespace rhls {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : Error { using Error::Error; };
struct BalanceError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct PoleError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace rhls

#pragma once

#include <stdexcept>
#include <string>

namespace cpoll {

// Every library failure derives from Error so callers (the CLI in particular)
// can map families of failures onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error { using Error::Error; };
struct DegenerateDistribution : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnstableSystem : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct WrongDistribution : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct SimDegenerate : Error { using Error::Error; };
struct MissingGridPoint : Error { using Error::Error; };
struct TooFewReplications : Error { using Error::Error; };
struct ZeroElapsed : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace cpoll

#pragma once

#include <stdexcept>
#include <string>

namespace sidelattice {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DimensionTooLarge : public Error {
public:
    using Error::Error;
};

class InconsistentSystem : public Error {
public:
    using Error::Error;
};

class RateTooSmall : public Error {
public:
    using Error::Error;
};

/// An exhaustive enumeration would exceed its cap.
class EnumerationTooLarge : public Error {
public:
    using Error::Error;
};

class FullRankSideInfo : public Error {
public:
    using Error::Error;
};

class InconsistentSideInfo : public Error {
public:
    using Error::Error;
};

/// rank(G * A_S) fell short of (K - M) * ell, so the subcode cannot be decoded uniquely.
class DegenerateSubcode : public Error {
public:
    using Error::Error;
};

/// Invalid scenario or CLI input. `path()` names the offending field, e.g. "receivers[1].S[0]".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace sidelattice

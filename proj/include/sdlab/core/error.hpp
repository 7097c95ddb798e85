#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sdlab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or dimensions that do not match, or exceed the supported caps.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A theorem hypothesis required by an experiment does not hold
/// (sup bound above 1, asymmetric coefficient set, ...).
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// The input is geometrically degenerate in a way the operation cannot handle.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not available for this representation.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration failed validation. Carries every problem found.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& ps) {
        std::string out;
        for (const auto& p : ps) {
            if (!out.empty()) out += "; ";
            out += p;
        }
        return out;
    }
    std::vector<std::string> problems_;
};

} // namespace sdlab

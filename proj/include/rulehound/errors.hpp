#pragma once

#include <stdexcept>
#include <string>

namespace rulehound {

// Malformed input: bad diff, unparseable rule response, invalid dataset.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or unusable environment (missing files, invalid options).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Backend could not be reached after exhausting the retry policy.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The backend answered but produced no usable completion (refusal, empty
// choice). Distinguished from TransportError so callers can map it to an
// undecided verdict instead of aborting.
class EmptyCompletionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rulehound

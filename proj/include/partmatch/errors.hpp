#pragma once

#include <stdexcept>
#include <string>

namespace partmatch {

/// No candidate bounding box satisfied the maximality criterion.
struct EmptyPoolError : std::runtime_error {
    explicit EmptyPoolError(const std::string& what) : std::runtime_error(what) {}
};

/// A packed part or descriptor file violates a structural invariant.
struct CorruptRecordError : std::runtime_error {
    explicit CorruptRecordError(const std::string& what) : std::runtime_error(what) {}
};

/// Two descriptors were built against different dictionary maps.
struct IncompatibleDescriptorError : std::runtime_error {
    explicit IncompatibleDescriptorError(const std::string& what) : std::runtime_error(what) {}
};

/// The weighted strategy needs per-part scores that are not present.
struct MissingScoresError : std::runtime_error {
    explicit MissingScoresError(const std::string& what) : std::runtime_error(what) {}
};

/// An original point-set map required by an operation is unavailable.
struct MissingMapError : std::runtime_error {
    explicit MissingMapError(const std::string& what) : std::runtime_error(what) {}
};

/// Text input could not be parsed; carries the 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    int line_number;
};

/// A travel window produced a submap with no points.
struct EmptySubmapError : std::runtime_error {
    explicit EmptySubmapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace partmatch

#pragma once

#include <stdexcept>
#include <string>

namespace muse {

// Base class for all domain errors raised by this library.
struct MuseError : std::runtime_error {
    explicit MuseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : MuseError {
    using MuseError::MuseError;
};
struct SchemaMismatch : MuseError {
    using MuseError::MuseError;
};
struct NonFiniteValue : MuseError {
    using MuseError::MuseError;
};
struct IoError : MuseError {
    using MuseError::MuseError;
};
struct EmptyTable : MuseError {
    using MuseError::MuseError;
};
struct NotNumericColumn : MuseError {
    using MuseError::MuseError;
};
struct IndexOutOfRange : MuseError {
    using MuseError::MuseError;
};
struct NotEnoughEligibleColumns : MuseError {
    using MuseError::MuseError;
};
struct InvalidRegime : MuseError {
    using MuseError::MuseError;
};
struct NotEnoughRows : MuseError {
    using MuseError::MuseError;
};
struct InvalidConfig : MuseError {
    using MuseError::MuseError;
};
struct MissingReplacementSampler : MuseError {
    using MuseError::MuseError;
};
struct EmptyInput : MuseError {
    using MuseError::MuseError;
};
struct EmptyScores : MuseError {
    using MuseError::MuseError;
};

}  // namespace muse

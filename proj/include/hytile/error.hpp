#pragma once

#include <stdexcept>
#include <string>

namespace hytile {

enum class ErrorCode {
    IllegalEdge,
    BadPartSizes,
    OutOfRange,
    BadArity,
    WrongPart,
    UnhousedVertex,
    TooLarge,
    DegenerateSplit,
    BadEll,
    BadParams,
    MetaMismatch,
    ArityMismatch,
    Budget,
    SamePart,
    ModeUnsupported,
    DimensionMismatch,
    EmptySet,
    Overflow,
    Parse,
};

const char* to_string(ErrorCode code);

// Every contract violation raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace hytile

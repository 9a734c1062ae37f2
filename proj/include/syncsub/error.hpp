#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace syncsub {

enum class ErrorKind {
    NotHermitian,
    DimMismatch,
    NotInKernel,
    InvalidArgument,
    DimensionCap,
    InvalidRep,
    GroupMismatch,
    LabelMismatch,
    NonIntegerMultiplicity,
    MultiplicityNotFree,
    NotEquivariant,
    ParseError,
    Internal,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that front ends can
/// map it onto exit codes without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::NotInKernel: return "NotInKernel";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionCap: return "DimensionCap";
        case ErrorKind::InvalidRep: return "InvalidRep";
        case ErrorKind::GroupMismatch: return "GroupMismatch";
        case ErrorKind::LabelMismatch: return "LabelMismatch";
        case ErrorKind::NonIntegerMultiplicity: return "NonIntegerMultiplicity";
        case ErrorKind::MultiplicityNotFree: return "MultiplicityNotFree";
        case ErrorKind::NotEquivariant: return "NotEquivariant";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace syncsub

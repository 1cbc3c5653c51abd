#include "dpcperm/error.hpp"

namespace dpcperm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NumericallySingular: return "NumericallySingular";
        case ErrorKind::InvalidPermutation: return "InvalidPermutation";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateGain: return "DegenerateGain";
        case ErrorKind::OrderSpaceTooLarge: return "OrderSpaceTooLarge";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::InfeasibleBlocking: return "InfeasibleBlocking";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::FormatError: return "FormatError";
    }
    return "Unknown";
}

}  // namespace dpcperm

#include "hmln/error.hpp"

namespace hmln {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "ParseError";
        case ErrorKind::validation: return "ValidationError";
        case ErrorKind::io: return "IoError";
        case ErrorKind::normalization_empty: return "NormalizationEmpty";
        case ErrorKind::blanket_empty: return "BlanketEmpty";
        case ErrorKind::size_limit: return "SizeLimit";
        case ErrorKind::consistency: return "ConsistencyError";
        case ErrorKind::checkpoint_incompatible: return "CheckpointIncompatible";
        case ErrorKind::numeric: return "NumericError";
        case ErrorKind::invalid_argument: return "InvalidArgument";
    }
    return "Error";
}

}  // namespace hmln

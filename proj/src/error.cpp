#include "tmg/error.hpp"

namespace tmg {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnbalancedPanel: return "UnbalancedPanel";
        case ErrorKind::DuplicateCell: return "DuplicateCell";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::TooFewPeriods: return "TooFewPeriods";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::SingularDesign: return "SingularDesign";
        case ErrorKind::AllSingular: return "AllSingular";
        case ErrorKind::AllTrimmed: return "AllTrimmed";
        case ErrorKind::SingularPooledGram: return "SingularPooledGram";
        case ErrorKind::SingularUnitGram: return "SingularUnitGram";
        case ErrorKind::SingularVdelta: return "SingularVdelta";
        case ErrorKind::SingularTeSystem: return "SingularTeSystem";
        case ErrorKind::SingularMbar: return "SingularMbar";
        case ErrorKind::RequiresTGreaterK: return "RequiresTGreaterK";
    }
    return "UnknownError";
}

bool is_input_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError:
        case ErrorKind::UnbalancedPanel:
        case ErrorKind::DuplicateCell:
        case ErrorKind::NonFiniteValue:
        case ErrorKind::TooFewPeriods:
        case ErrorKind::InvalidConfig:
            return true;
        default:
            return false;
    }
}

}  // namespace tmg

#pragma once

#include <stdexcept>
#include <string>

namespace matchbox {

// Every failure the library reports deliberately, with a stable code the CLI
// can map to exit statuses. Anything else escaping is a plain logic bug.
enum class ErrorCode {
    // relcore / ingestion
    MalformedRow,
    DuplicateTid,
    NonNullableNull,
    TidMismatch,
    SchemaError,
    // mdlang
    SyntaxError,
    UnboundVariable,
    IdentityOutsideLeadingAtoms,
    DisconnectedContext,
    ClosureBudgetExceeded,
    ModeMismatch,
    // chase
    MissingMatchingFunction,
    ChaseBudgetExceeded,
    OracleBudgetExceeded,
    // blocking
    NonBlockRhs,
    BlockSimilarityAtom,
    // classify
    RaggedVectors,
    SingleClassTraining,
    DimensionMismatch,
    // cli
    ConfigError,
    DataError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateTid: return "DuplicateTid";
        case ErrorCode::NonNullableNull: return "NonNullableNull";
        case ErrorCode::TidMismatch: return "TidMismatch";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnboundVariable: return "UnboundVariable";
        case ErrorCode::IdentityOutsideLeadingAtoms: return "IdentityOutsideLeadingAtoms";
        case ErrorCode::DisconnectedContext: return "DisconnectedContext";
        case ErrorCode::ClosureBudgetExceeded: return "ClosureBudgetExceeded";
        case ErrorCode::ModeMismatch: return "ModeMismatch";
        case ErrorCode::MissingMatchingFunction: return "MissingMatchingFunction";
        case ErrorCode::ChaseBudgetExceeded: return "ChaseBudgetExceeded";
        case ErrorCode::OracleBudgetExceeded: return "OracleBudgetExceeded";
        case ErrorCode::NonBlockRhs: return "NonBlockRhs";
        case ErrorCode::BlockSimilarityAtom: return "BlockSimilarityAtom";
        case ErrorCode::RaggedVectors: return "RaggedVectors";
        case ErrorCode::SingleClassTraining: return "SingleClassTraining";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::DataError: return "DataError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code), message_(message) {}

    ErrorCode code() const { return code_; }

    // The message without the code-name prefix, for rethrowing with context.
    const std::string& message() const { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace matchbox

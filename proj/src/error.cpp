#include "nsvqa/error.hpp"

namespace nsvqa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::DanglingRelation: return "DanglingRelation";
    case ErrorCode::DuplicateObjectId: return "DuplicateObjectId";
    case ErrorCode::MissingGraph: return "MissingGraph";
    case ErrorCode::UnknownOperation: return "UnknownOperation";
    case ErrorCode::BadQualifier: return "BadQualifier";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::ForwardDependency: return "ForwardDependency";
    case ErrorCode::EmptyProgram: return "EmptyProgram";
    case ErrorCode::LiteralOutOfRange: return "LiteralOutOfRange";
    case ErrorCode::UnknownOlfOperation: return "UnknownOlfOperation";
    case ErrorCode::MalformedOlf: return "MalformedOlf";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NonAnswerValue: return "NonAnswerValue";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::UnsupportedTemplate: return "UnsupportedTemplate";
    case ErrorCode::NonNumericAnswer: return "NonNumericAnswer";
    case ErrorCode::NonBinaryAnswer: return "NonBinaryAnswer";
    case ErrorCode::PhraseNotFound: return "PhraseNotFound";
    case ErrorCode::LabelTransformConflict: return "LabelTransformConflict";
    case ErrorCode::ForbiddenAlteringOnCounting: return "ForbiddenAlteringOnCounting";
    case ErrorCode::RewriteNotApplicable: return "RewriteNotApplicable";
    case ErrorCode::MismatchedPair: return "MismatchedPair";
    case ErrorCode::UnpairedRecord: return "UnpairedRecord";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nsvqa

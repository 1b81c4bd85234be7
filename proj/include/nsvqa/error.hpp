#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsvqa {

enum class ErrorCode {
  // ingestion
  MalformedFile,
  DanglingRelation,
  DuplicateObjectId,
  MissingGraph,
  // program language
  UnknownOperation,
  BadQualifier,
  ArityError,
  ForwardDependency,
  EmptyProgram,
  LiteralOutOfRange,
  UnknownOlfOperation,
  MalformedOlf,
  // execution
  TypeMismatch,
  NonAnswerValue,
  // test generation
  PoolExhausted,
  UnsupportedTemplate,
  NonNumericAnswer,
  NonBinaryAnswer,
  PhraseNotFound,
  LabelTransformConflict,
  ForbiddenAlteringOnCounting,
  RewriteNotApplicable,
  MismatchedPair,
  // evaluation
  UnpairedRecord,
  KTooLarge,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nsvqa

#pragma once

#include <stdexcept>
#include <string>

namespace gvic {

struct InvalidConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidTemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Terminal generation failure for one agent call, after the backend's own
// retry policy has been exhausted (or for non-retryable rejections).
struct AgentFailedError : std::runtime_error {
  enum class Kind { Timeout, Rejected, MalformedReply, Other };
  AgentFailedError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

struct AllAgentsFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScoringFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JudgeFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyEvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MismatchedAnswerSetsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingRunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
  int line;
};

struct EmptyDatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SampleTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FingerprintMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gvic

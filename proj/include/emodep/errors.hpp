#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace emodep {

// Base class for all library errors. `code()` is a stable machine-readable
// tag; the CLI maps it into structured error JSON on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape_error", m) {}
};
struct EmptySignal : Error {
  explicit EmptySignal(const std::string& m) : Error("empty_signal", m) {}
};
struct SequenceTooShort : Error {
  explicit SequenceTooShort(const std::string& m) : Error("sequence_too_short", m) {}
};
struct NonFiniteLoss : Error {
  explicit NonFiniteLoss(const std::string& m) : Error("non_finite_loss", m) {}
};
struct NonFiniteGradient : Error {
  explicit NonFiniteGradient(const std::string& m) : Error("non_finite_gradient", m) {}
};
struct ModalityMismatch : Error {
  explicit ModalityMismatch(const std::string& m) : Error("modality_mismatch", m) {}
};
struct ChecksumError : Error {
  explicit ChecksumError(const std::string& m) : Error("checksum_error", m) {}
};
struct EmptySession : Error {
  explicit EmptySession(const std::string& m) : Error("empty_session", m) {}
};
struct EmptyDataset : Error {
  explicit EmptyDataset(const std::string& m) : Error("empty_dataset", m) {}
};
struct EmptyGroup : Error {
  explicit EmptyGroup(const std::string& m) : Error("empty_group", m) {}
};
struct LabelMissing : Error {
  explicit LabelMissing(const std::string& m) : Error("label_missing", m) {}
};
struct DegenerateSplit : Error {
  explicit DegenerateSplit(const std::string& m) : Error("degenerate_split", m) {}
};
struct MissingFile : Error {
  explicit MissingFile(const std::string& m) : Error("missing_file", m) {}
};
struct DuplicateId : Error {
  explicit DuplicateId(const std::string& m) : Error("duplicate_id", m) {}
};
struct LabelInconsistent : Error {
  explicit LabelInconsistent(const std::string& m) : Error("label_inconsistent", m) {}
};
struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& m) : Error("invalid_spec", m) {}
};
struct InvalidInput : Error {
  explicit InvalidInput(const std::string& m) : Error("invalid_input", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io_error", m) {}
};

}  // namespace emodep

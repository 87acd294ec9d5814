#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagsync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regression window without two distinct local-clock readings.
class DegenerateWindow : public Error {
 public:
  DegenerateWindow() : Error("regression window has fewer than two distinct cw values") {}
};

class NotFitted : public Error {
 public:
  NotFitted() : Error("regression state has no fitted line") {}
};

/// Last BlockWrite observed without a preceding first BlockWrite.
class MissingFirstEvent : public Error {
 public:
  MissingFirstEvent() : Error("last BlockWrite received without a first BlockWrite") {}
};

/// The tag lost power before a protocol action completed.
class TagUnpowered : public Error {
 public:
  TagUnpowered() : Error("tag lost power during protocol action") {}
};

class CorruptSnapshot : public Error {
 public:
  CorruptSnapshot() : Error("non-volatile snapshot failed checksum validation") {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              reason),
        line_(line),
        column_(column),
        reason_(reason) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

/// A trace row whose reference time does not strictly increase.
class MonotonicityError : public Error {
 public:
  explicit MonotonicityError(std::size_t line)
      : Error("line " + std::to_string(line) + ": reference time is not strictly increasing"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct FieldDiagnostic {
  std::string field;
  std::string message;
};

/// Configuration rejected; carries one diagnostic per offending field.
class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(std::vector<FieldDiagnostic> diagnostics)
      : Error(render(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<FieldDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string render(const std::vector<FieldDiagnostic>& diagnostics) {
    std::string out = "invalid configuration";
    for (const auto& d : diagnostics) {
      out += "\n  " + d.field + ": " + d.message;
    }
    return out;
  }

  std::vector<FieldDiagnostic> diagnostics_;
};

}  // namespace tagsync

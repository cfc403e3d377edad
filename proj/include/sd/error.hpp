#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sd {

// Every library failure derives from sd::Error. The CLI maps ArgumentError
// to a usage failure and everything else to a data failure.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

class FormatError : public Error {
  public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

  private:
    std::uint64_t offset_;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class GeometryError : public Error {
  public:
    using Error::Error;
};

class AlignmentError : public Error {
  public:
    using Error::Error;
};

class TrainingError : public Error {
  public:
    using Error::Error;
};

class UndefinedMetricError : public Error {
  public:
    using Error::Error;
};

} // namespace sd

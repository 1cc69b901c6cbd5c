#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gcr {

// Base class for every error the library throws. Callers that only care about
// "something in the pipeline failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Lookup of a surface string that is not interned in the graph.
class UnknownEntityError : public Error {
 public:
  explicit UnknownEntityError(const std::string& name)
      : Error("unknown entity: '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrieError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind { kBadMagic, kVersionMismatch, kTruncated, kCorrupt };

class TrieFormatError : public TrieError {
 public:
  TrieFormatError(FormatErrorKind kind, const std::string& what) : TrieError(what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

enum class TransportErrorKind { kTimeout, kConnection, kProtocol, kHttpStatus };

// Failure talking to a remote model endpoint.
class TransportError : public Error {
 public:
  TransportError(TransportErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}

  TransportErrorKind kind() const noexcept { return kind_; }

 private:
  TransportErrorKind kind_;
};

// Scorer failure surfaced by the decoder, tagged with the failing beam's context length.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t context_length)
      : Error(what + " (context length " + std::to_string(context_length) + ")"),
        context_length_(context_length) {}

  std::size_t context_length() const noexcept { return context_length_; }

 private:
  std::size_t context_length_;
};

}  // namespace gcr

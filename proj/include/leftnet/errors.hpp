// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leftnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A frame or direction was requested from (near-)collinear or coincident input.
class DegenerateGeometry : public Error {
 public:
  enum class Site { kNone, kNode, kEdge };

  explicit DegenerateGeometry(const std::string& what, Site site = Site::kNone,
                              std::ptrdiff_t index = -1)
      : Error(what), site_(site), index_(index) {}

  Site site() const noexcept { return site_; }
  /// Offending node or edge index inside a graph, -1 when not applicable.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  Site site_;
  std::ptrdiff_t index_;
};

class EmptyGraph : public Error {
 public:
  using Error::Error;
};

class NotAnEdge : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownElement : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class MissingLabels : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

}  // namespace leftnet

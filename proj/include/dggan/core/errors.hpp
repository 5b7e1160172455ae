#pragma once

#include <stdexcept>
#include <string>

namespace dggan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset root does not match the requested layout (missing/mismatched manifest).
class LayoutMismatchError : public Error {
 public:
  using Error::Error;
};

// A specific dataset record could not be read; message names the record id.
class RecordError : public Error {
 public:
  RecordError(const std::string& record_id, const std::string& detail)
      : Error("record '" + record_id + "': " + detail), record_id_(record_id) {}
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

// Constant depth map: Eq.-style min-max normalization is undefined.
class DegenerateDepthError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
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

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dggan

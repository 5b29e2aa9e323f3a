#pragma once

#include <stdexcept>
#include <string>

namespace nvs {

// All library errors derive from nvs::Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDepthError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file contents (PNG layout, pose lines, calib).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvs

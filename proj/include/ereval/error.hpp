#pragma once

#include <stdexcept>
#include <string>

namespace ereval {

// Error categories map 1:1 onto the C API status codes and onto HTTP
// statuses in the service.
enum class ErrorKind {
  kInvalidInput,  // malformed file, bad parameter, contract violation
  kNotFound,      // unknown record / cluster / session / task id
  kConflict,      // lease held by someone else, overlapping benchmark clusters
  kQualityControl,// edit rejected by a hard QC rule
  kDegenerate,    // estimator undefined on the given sample
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ereval

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distdiff {

// Every library failure carries the name of the module that raised it and a
// short error kind, so callers can print "module.Kind: message".
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)), kind_(std::move(kind)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }
  std::string qualified_name() const { return module_ + "." + kind_; }

 private:
  std::string module_;
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string module, const std::string& message)
      : Error(std::move(module), "InvalidArgument", message) {}
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::string module, const std::string& message)
      : Error(std::move(module), "DimensionMismatch", message) {}
};

// A treatment arm has no observations, so its density cannot be estimated.
class EmptyArm : public Error {
 public:
  static constexpr std::size_t kNoSite = static_cast<std::size_t>(-1);

  EmptyArm(std::string module, int arm, std::size_t site = kNoSite)
      : Error(std::move(module), "EmptyArm", describe(arm, site)), arm_(arm), site_(site) {}

  int arm() const noexcept { return arm_; }
  std::size_t site() const noexcept { return site_; }
  bool has_site() const noexcept { return site_ != kNoSite; }

 private:
  static std::string describe(int arm, std::size_t site) {
    std::string msg = "arm " + std::to_string(arm) + " has no observations";
    if (site != kNoSite) msg += " at site " + std::to_string(site);
    return msg;
  }

  int arm_;
  std::size_t site_;
};

// A nuisance training fold contains a single treatment arm.
class DegenerateArm : public Error {
 public:
  DegenerateArm(std::string module, const std::string& message)
      : Error(std::move(module), "DegenerateArm", message) {}
};

class PropensityUnderflow : public Error {
 public:
  PropensityUnderflow(std::string module, const std::string& message)
      : Error(std::move(module), "PropensityUnderflow", message) {}
};

class SingularDesign : public Error {
 public:
  SingularDesign(std::string module, const std::string& message)
      : Error(std::move(module), "SingularDesign", message) {}
};

class DegenerateResample : public Error {
 public:
  DegenerateResample(std::string module, const std::string& message)
      : Error(std::move(module), "DegenerateResample", message) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::string module, const std::string& message)
      : Error(std::move(module), "SchemaError", message) {}
};

// Bad cell content; row is 1-based and counts data rows after the header.
class ValueError : public Error {
 public:
  ValueError(std::string module, std::size_t row, const std::string& message)
      : Error(std::move(module), "ValueError",
              "row " + std::to_string(row) + ": " + message),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  IoError(std::string module, const std::string& message)
      : Error(std::move(module), "IoError", message) {}
};

}  // namespace distdiff

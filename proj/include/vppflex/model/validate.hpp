#pragma once

#include <string>
#include <vector>

#include "vppflex/model/types.hpp"

namespace vppflex::model {

enum class Severity { error, warning };

struct ValidationIssue {
  Severity severity = Severity::error;
  std::string code;     // stable machine-readable tag, e.g. "not-radial"
  std::string message;  // human-readable detail naming the offending item
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  /// True when no error-severity issue is present (warnings are allowed).
  bool ok() const;
  bool has(std::string_view code) const;
  void add(Severity severity, std::string code, std::string message);
};

/// Checks every structural and physical invariant of an instance: radial
/// topology rooted at one slack bus, parameter ranges, profile lengths, the
/// metering-area partition and EV end-of-stay feasibility.
ValidationReport validate_instance(const VppInstance& instance);

/// Checks that a product can be evaluated on the instance (step size and
/// delivery window inside the horizon).
ValidationReport validate_product(const VppInstance& instance, const ProductSpec& spec);

}  // namespace vppflex::model

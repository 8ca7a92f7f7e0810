#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace hardyz {

enum class error_kind {
  domain,
  precision,
  pole,
  branch,
  empty_window,
  nonpositive_denominator,
  budget_exceeded,
  node_budget_exceeded,
  inconsistent_inputs,
  degenerate_curvature,
  invalid_params,
  io,
};

constexpr std::string_view to_string(error_kind k) noexcept {
  switch (k) {
    case error_kind::domain: return "DomainError";
    case error_kind::precision: return "PrecisionError";
    case error_kind::pole: return "PoleError";
    case error_kind::branch: return "BranchError";
    case error_kind::empty_window: return "EmptyWindow";
    case error_kind::nonpositive_denominator: return "NonpositiveDenominator";
    case error_kind::budget_exceeded: return "BudgetExceeded";
    case error_kind::node_budget_exceeded: return "NodeBudgetExceeded";
    case error_kind::inconsistent_inputs: return "InconsistentInputs";
    case error_kind::degenerate_curvature: return "DegenerateCurvature";
    case error_kind::invalid_params: return "InvalidParams";
    case error_kind::io: return "IOError";
  }
  return "Error";
}

/// Process exit code for an error kind: 2 for precondition violations,
/// 3 for numerical-budget failures.
constexpr int exit_code(error_kind k) noexcept {
  switch (k) {
    case error_kind::precision:
    case error_kind::branch:
    case error_kind::budget_exceeded:
    case error_kind::node_budget_exceeded:
      return 3;
    default:
      return 2;
  }
}

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(what), kind_(kind), details_(std::move(details)) {}

  error_kind kind() const noexcept { return kind_; }
  const nlohmann::json& details() const noexcept { return details_; }

  nlohmann::json to_json() const {
    return {{"error", std::string(to_string(kind_))}, {"message", what()}, {"details", details_}};
  }

 private:
  error_kind kind_;
  nlohmann::json details_;
};

}  // namespace hardyz

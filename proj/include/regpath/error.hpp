#pragma once
#include <stdexcept>
#include <string>

namespace regpath {

enum class ErrorKind {
    invalid_parameter,
    invalid_label,
    dimension_mismatch,
    empty_dataset,
    task_mismatch,
    degenerate_design,
    singular_curvature,
    kkt_violation,
    non_convergence,
    budget_exceeded,
    parse_error,
    missing_column,
    non_finite_value,
    label_domain,
    io_error,
    empty_path,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace regpath

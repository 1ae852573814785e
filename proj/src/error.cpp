#include <regpath/error.hpp>

namespace regpath {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::invalid_parameter: return "invalid-parameter";
        case ErrorKind::invalid_label: return "invalid-label";
        case ErrorKind::dimension_mismatch: return "dimension-mismatch";
        case ErrorKind::empty_dataset: return "empty-dataset";
        case ErrorKind::task_mismatch: return "loss/task mismatch";
        case ErrorKind::degenerate_design: return "degenerate-design";
        case ErrorKind::singular_curvature: return "singular-curvature";
        case ErrorKind::kkt_violation: return "kkt-violation";
        case ErrorKind::non_convergence: return "non-convergence";
        case ErrorKind::budget_exceeded: return "budget-exceeded";
        case ErrorKind::parse_error: return "parse-error";
        case ErrorKind::missing_column: return "missing-column";
        case ErrorKind::non_finite_value: return "non-finite-value";
        case ErrorKind::label_domain: return "label-domain";
        case ErrorKind::io_error: return "io-error";
        case ErrorKind::empty_path: return "empty-path";
    }
    return "unknown";
}

} // namespace regpath

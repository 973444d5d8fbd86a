#pragma once

#include <stdexcept>
#include <string>

namespace paft {

enum class ErrorCode {
    invalid_argument,
    missing_example,
    empty_generation,
    no_templates_found,
    degenerate_partition,
    missing_field,
    render_incomplete,
    unknown_family,
    parse_error,
    schema_error,
    empty_prompt_set,
    empty_dataset,
    empty_batch,
    empty_rows,
    shape_error,
    perturb_failed,
    too_few_samples,
    invalid_size,
    invalid_grid,
    io_error,
    endpoint_error,
    network_forbidden,
};

/// All operations report failures by throwing Error with a typed code.
/// The CLI maps codes onto exit codes (2 usage, 3 data, 4 endpoint).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::missing_example: return "MissingExample";
    case ErrorCode::empty_generation: return "EmptyGeneration";
    case ErrorCode::no_templates_found: return "NoTemplatesFound";
    case ErrorCode::degenerate_partition: return "DegeneratePartition";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::render_incomplete: return "RenderIncomplete";
    case ErrorCode::unknown_family: return "UnknownFamily";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::empty_prompt_set: return "EmptyPromptSet";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::empty_batch: return "EmptyBatch";
    case ErrorCode::empty_rows: return "EmptyRows";
    case ErrorCode::shape_error: return "ShapeError";
    case ErrorCode::perturb_failed: return "PerturbFailed";
    case ErrorCode::too_few_samples: return "TooFewSamples";
    case ErrorCode::invalid_size: return "InvalidSize";
    case ErrorCode::invalid_grid: return "InvalidGrid";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::endpoint_error: return "EndpointError";
    case ErrorCode::network_forbidden: return "NetworkForbidden";
    }
    return "Unknown";
}

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

} // namespace paft

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace egp {

enum class ErrorCode {
    cycle,
    duplicate_node,
    unknown_endpoint,
    self_loop,
    latent_adjusted,
    invalid_name,
    unknown_node,
    condition_on_latent,
    latent_in_set,
    invalid_argument,
    parse_error,
    unknown_edge_in_spec,
    missing_column,
    singular_design,
    empty_arm,
    insufficient_sample,
    corrupt_corpus,
    io_error,
};

/// Stable snake_case identifier used in JSON error payloads.
std::string_view error_code_name(ErrorCode code);

/// Base of every error raised by the engine. Analysis-negative outcomes
/// (not identified, invalid instrument) are results, never errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Directed cycle found while building a graph. `cycle()` lists the nodes of
/// one cycle with the first node repeated at the end (A, B, A).
class CycleError : public Error {
public:
    explicit CycleError(std::vector<std::string> cycle);

    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    std::vector<std::string> cycle_;
};

} // namespace egp

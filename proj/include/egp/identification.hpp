#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "egp/graph.hpp"
#include "egp/separation.hpp"

namespace egp {

enum class AdjustmentViolation { blocks_causal_path, open_backdoor, contains_descendant, contains_latent };

std::string_view violation_name(AdjustmentViolation v);

struct AdjustmentVerdict {
    bool admissible = false;
    std::optional<AdjustmentViolation> violated;
    std::optional<PathReport> witness;
    /// Descendants of the exposure found in the set (for contains_descendant
    /// and blocks_causal_path).
    NodeSet offending;
};

struct AdjustmentSearch {
    std::vector<NodeSet> sets;
    /// Every subset of the candidate pool was examined; an empty `sets` is
    /// then a definitive "not identifiable by adjustment".
    bool exhausted = false;
    /// Stopped after `max_count` sets.
    bool truncated = false;
    std::size_t max_size = 0;
    std::size_t max_count = 0;
    NodeSet candidates;
};

struct IvVerdict {
    bool relevant = false;
    bool excluded_and_exogenous = false;
    bool valid = false;
    /// Open path instrument ... outcome in the graph with edges into the
    /// exposure removed, when the exclusion/exogeneity condition fails.
    std::optional<PathReport> witness;
};

inline constexpr std::size_t kDefaultMaxAdjustmentSize = 6;
inline constexpr std::size_t kDefaultMaxAdjustmentCount = 64;

/// Directed paths exposure -> ... -> outcome.
std::vector<PathReport> causal_paths(const CausalGraph& g, const std::string& exposure,
                                     const std::string& outcome);

/// Backdoor criterion: `z` has no descendant of the exposure and d-separates
/// exposure and outcome once the exposure's outgoing edges are removed.
/// Throws latent_in_set when `z` holds a latent node.
AdjustmentVerdict backdoor_admissible(const CausalGraph& g, const std::string& exposure,
                                      const std::string& outcome, const NodeSet& z);

/// Inclusion-minimal admissible sets drawn from observed non-descendants of
/// the exposure, ordered by size then lexicographically.
AdjustmentSearch minimal_adjustment_sets(const CausalGraph& g, const std::string& exposure,
                                         const std::string& outcome,
                                         std::size_t max_size = kDefaultMaxAdjustmentSize,
                                         std::size_t max_count = kDefaultMaxAdjustmentCount);

/// Conditional instrument check for `instrument` given `given`.
IvVerdict iv_check(const CausalGraph& g, const std::string& instrument, const std::string& exposure,
                   const std::string& outcome, const NodeSet& given);

} // namespace egp

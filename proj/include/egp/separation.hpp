#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "egp/graph.hpp"

namespace egp {

enum class Provenance { query, local_markov, global_basis };

std::string_view provenance_name(Provenance p);

/// a ⊥ b | given
struct CIStatement {
    NodeSet a;
    NodeSet b;
    NodeSet given;
    Provenance provenance = Provenance::query;

    std::string to_string() const;
    bool operator==(const CIStatement&) const = default;
};

enum class Arrow { forward, backward, bidirected };
enum class PathStatus { open, blocked };

/// One simple path between two declared nodes. A step through the synthetic
/// latent of X<->Y is collapsed into a single `bidirected` arrow.
struct PathReport {
    std::vector<std::string> nodes;
    std::vector<Arrow> arrows;  // arrows[i] joins nodes[i] and nodes[i + 1]
    PathStatus status = PathStatus::open;
    NodeSet blockers;   // non-colliders in the conditioning set
    NodeSet openers;    // colliders activated by the conditioning set
    NodeSet colliders;  // every collider on the path

    bool open() const { return status == PathStatus::open; }
    /// True when every arrow points forward (a causal path).
    bool directed() const;
    /// "D <- X -> Y"
    std::string render() const;
};

struct PathEnumeration {
    std::vector<PathReport> paths;
    bool truncated = false;
};

inline constexpr std::size_t kDefaultPathLimit = 10'000;

/// True iff every path between `a` and `b` is blocked by `given`.
/// Sets must be pairwise disjoint; `given` may not contain latent nodes
/// (condition_on_latent).
bool d_separated(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& given);

/// Declared nodes d-connected to `a` given `given` (Bayes-ball reachability).
NodeSet d_connected_nodes(const CausalGraph& g, const NodeSet& a, const NodeSet& given);

/// All simple paths from `a` to `b`, shortest first, then lexicographic by
/// node sequence. At most `limit` paths are returned; `truncated` reports
/// that more exist.
PathEnumeration enumerate_paths(const CausalGraph& g, const std::string& a, const std::string& b,
                                const NodeSet& given, std::size_t limit = kDefaultPathLimit);

/// The first open path in enumeration order, if any.
std::optional<PathReport> first_open_path(const CausalGraph& g, const std::string& a,
                                          const std::string& b, const NodeSet& given);

/// Directed paths a -> ... -> b in enumeration order.
std::vector<PathReport> directed_paths(const CausalGraph& g, const std::string& a,
                                       const std::string& b, const NodeSet& given = {});

} // namespace egp

#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egp {

using NodeSet = std::set<std::string>;

struct NodeRole {
    bool latent = false;
    bool exposure = false;
    bool outcome = false;
    bool adjusted = false;

    bool operator==(const NodeRole&) const = default;
};

enum class EdgeKind { directed, bidirected };

struct Edge {
    std::string from;
    std::string to;
    EdgeKind kind = EdgeKind::directed;

    auto operator<=>(const Edge&) const = default;
};

struct NodeDecl {
    std::string name;
    NodeRole role;
};

/// Prefix reserved for the latent parents that stand in for bidirected arcs.
inline constexpr std::string_view kSyntheticPrefix = "\xE2\x80\xB9u:";

/// Immutable causal DAG.
///
/// Declared nodes keep insertion order. Internally every bidirected edge X<->Y
/// is expanded to a synthetic latent parent of X and Y, so the analyses only
/// ever see a plain DAG. Canonical indices [0, declared_count()) are the
/// declared nodes in insertion order; synthetic latents follow.
class CausalGraph {
public:
    CausalGraph() = default;

    /// Validates and canonicalizes. Throws CycleError, or Error with
    /// duplicate_node / unknown_endpoint / self_loop / latent_adjusted /
    /// invalid_name.
    static CausalGraph build(std::string name, std::vector<NodeDecl> nodes,
                             std::vector<Edge> edges);

    const std::string& name() const noexcept { return name_; }
    std::span<const NodeDecl> nodes() const noexcept { return nodes_; }
    /// Declared edges, deduplicated; bidirected endpoints in lexicographic order.
    std::span<const Edge> edges() const noexcept { return edges_; }

    bool contains(std::string_view node) const;
    const NodeRole& role(std::string_view node) const;
    bool is_observed(std::string_view node) const { return !role(node).latent; }

    NodeSet parents(std::string_view node) const;
    NodeSet children(std::string_view node) const;
    NodeSet ancestors(std::string_view node) const;
    NodeSet descendants(std::string_view node) const;

    /// Declared nodes flagged with the role, in insertion order.
    std::vector<std::string> exposures() const;
    std::vector<std::string> outcomes() const;
    NodeSet adjusted() const;
    NodeSet observed() const;

    /// G with every edge into `node` removed, including its bidirected arcs.
    CausalGraph mutilate_incoming(std::string_view node) const;
    /// G with every directed edge out of `node` removed.
    CausalGraph mutilate_outgoing(std::string_view node) const;

    /// Same name, roles and edge set; declaration order is ignored.
    bool structurally_equal(const CausalGraph& other) const;

    // Canonical (expanded) view, indexed by int.
    std::size_t size() const noexcept { return names_.size(); }
    std::size_t declared_count() const noexcept { return nodes_.size(); }
    int index(std::string_view node) const;  ///< throws unknown_node
    std::optional<int> find(std::string_view node) const;
    const std::string& name_of(int v) const { return names_[v]; }
    bool is_latent(int v) const { return latent_[v]; }
    bool is_synthetic(int v) const { return v >= static_cast<int>(nodes_.size()); }
    const std::vector<int>& parent_ids(int v) const { return parents_[v]; }
    const std::vector<int>& child_ids(int v) const { return children_[v]; }
    /// Topological order, ties broken by name.
    const std::vector<int>& topological_order() const noexcept { return topo_; }
    /// Canonical directed edges (from, to), sorted by names.
    std::vector<std::pair<int, int>> canonical_edges() const;

    /// Membership mask of `seeds` and all of their ancestors.
    std::vector<bool> ancestor_closure(std::span<const int> seeds) const;
    /// Membership mask of `seeds` and all of their descendants.
    std::vector<bool> descendant_closure(std::span<const int> seeds) const;

    /// Name used in ASCII renderings: declared name, or U[X<->Y] for synthetics.
    std::string display_name(int v) const;

private:
    NodeSet collect_(const std::vector<bool>& mask, int exclude) const;

    std::string name_;
    std::vector<NodeDecl> nodes_;
    std::vector<Edge> edges_;

    std::vector<std::string> names_;
    std::vector<bool> latent_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> topo_;
};

/// Internal name of the synthetic latent behind `a <-> b`.
std::string synthetic_latent_name(std::string_view a, std::string_view b);

} // namespace egp

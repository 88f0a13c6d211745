#include "egp/graph.hpp"

#include <algorithm>
#include <queue>

#include "egp/error.hpp"

namespace egp {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::cycle: return "cycle";
        case ErrorCode::duplicate_node: return "duplicate_node";
        case ErrorCode::unknown_endpoint: return "unknown_endpoint";
        case ErrorCode::self_loop: return "self_loop";
        case ErrorCode::latent_adjusted: return "latent_adjusted";
        case ErrorCode::invalid_name: return "invalid_name";
        case ErrorCode::unknown_node: return "unknown_node";
        case ErrorCode::condition_on_latent: return "condition_on_latent";
        case ErrorCode::latent_in_set: return "latent_in_set";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::unknown_edge_in_spec: return "unknown_edge_in_spec";
        case ErrorCode::missing_column: return "missing_column";
        case ErrorCode::singular_design: return "singular_design";
        case ErrorCode::empty_arm: return "empty_arm";
        case ErrorCode::insufficient_sample: return "insufficient_sample";
        case ErrorCode::corrupt_corpus: return "corrupt_corpus";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
    std::string out;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i) out += " -> ";
        out += cycle[i];
    }
    return out;
}

} // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : Error(ErrorCode::cycle, "directed cycle: " + join_cycle(cycle)), cycle_(std::move(cycle)) {}

std::string synthetic_latent_name(std::string_view a, std::string_view b) {
    std::string out(kSyntheticPrefix);
    out += a;
    out += ',';
    out += b;
    out += "\xE2\x80\xBA";
    return out;
}

CausalGraph CausalGraph::build(std::string name, std::vector<NodeDecl> nodes,
                               std::vector<Edge> edges) {
    CausalGraph g;
    g.name_ = std::move(name);

    for (auto& decl : nodes) {
        if (decl.name.empty())
            throw Error(ErrorCode::invalid_name, "node name must be non-empty");
        if (decl.name.starts_with(kSyntheticPrefix))
            throw Error(ErrorCode::invalid_name,
                        "node name '" + decl.name + "' uses the reserved synthetic-latent prefix");
        if (g.index_.contains(decl.name))
            throw Error(ErrorCode::duplicate_node, "duplicate node '" + decl.name + "'");
        if (decl.role.latent && decl.role.adjusted)
            throw Error(ErrorCode::latent_adjusted,
                        "node '" + decl.name + "' cannot be both latent and adjusted");
        g.index_.emplace(decl.name, static_cast<int>(g.names_.size()));
        g.names_.push_back(decl.name);
        g.latent_.push_back(decl.role.latent);
    }
    g.nodes_ = std::move(nodes);

    std::set<Edge> seen;
    for (auto& e : edges) {
        if (!g.index_.contains(e.from))
            throw Error(ErrorCode::unknown_endpoint, "edge endpoint '" + e.from + "' is not declared");
        if (!g.index_.contains(e.to))
            throw Error(ErrorCode::unknown_endpoint, "edge endpoint '" + e.to + "' is not declared");
        if (e.from == e.to)
            throw Error(ErrorCode::self_loop, "self-loop on '" + e.from + "'");
        if (e.kind == EdgeKind::bidirected && e.to < e.from) std::swap(e.from, e.to);
        if (seen.insert(e).second) g.edges_.push_back(std::move(e));
    }

    const auto declared = g.names_.size();
    g.parents_.assign(declared, {});
    g.children_.assign(declared, {});
    for (const auto& e : g.edges_) {
        const int from = g.index_.at(e.from);
        const int to = g.index_.at(e.to);
        if (e.kind == EdgeKind::directed) {
            g.children_[from].push_back(to);
            g.parents_[to].push_back(from);
        } else {
            const int u = static_cast<int>(g.names_.size());
            g.names_.push_back(synthetic_latent_name(e.from, e.to));
            g.latent_.push_back(true);
            g.index_.emplace(g.names_.back(), u);
            g.parents_.push_back({});
            g.children_.push_back({from, to});
            g.parents_[from].push_back(u);
            g.parents_[to].push_back(u);
        }
    }

    // Kahn with a name-ordered frontier gives the lexicographic tie-break.
    const auto n = g.names_.size();
    std::vector<int> indegree(n);
    for (std::size_t v = 0; v < n; ++v) indegree[v] = static_cast<int>(g.parents_[v].size());
    auto by_name = [&](int a, int b) { return g.names_[a] > g.names_[b]; };
    std::priority_queue<int, std::vector<int>, decltype(by_name)> ready(by_name);
    for (std::size_t v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push(static_cast<int>(v));
    while (!ready.empty()) {
        const int v = ready.top();
        ready.pop();
        g.topo_.push_back(v);
        for (int c : g.children_[v])
            if (--indegree[c] == 0) ready.push(c);
    }

    if (g.topo_.size() != n) {
        // Every unresolved node keeps an unresolved parent, so walking parent
        // links must revisit a node.
        int start = -1;
        for (std::size_t v = 0; v < n; ++v)
            if (indegree[v] > 0 && (start < 0 || g.names_[v] < g.names_[start]))
                start = static_cast<int>(v);
        std::vector<int> walk;
        std::vector<int> pos(n, -1);
        int v = start;
        while (pos[v] < 0) {
            pos[v] = static_cast<int>(walk.size());
            walk.push_back(v);
            int next = -1;
            for (int p : g.parents_[v])
                if (indegree[p] > 0 && (next < 0 || g.names_[p] < g.names_[next])) next = p;
            v = next;
        }
        std::vector<int> loop(walk.begin() + pos[v], walk.end());
        std::reverse(loop.begin(), loop.end());
        std::rotate(loop.begin(),
                    std::min_element(loop.begin(), loop.end(),
                                     [&](int a, int b) { return g.names_[a] < g.names_[b]; }),
                    loop.end());
        std::vector<std::string> cycle;
        for (int u : loop) cycle.push_back(g.names_[u]);
        cycle.push_back(cycle.front());
        throw CycleError(std::move(cycle));
    }

    for (auto& ps : g.parents_) std::sort(ps.begin(), ps.end());
    for (auto& cs : g.children_) std::sort(cs.begin(), cs.end());
    return g;
}

std::optional<int> CausalGraph::find(std::string_view node) const {
    auto it = index_.find(std::string(node));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int CausalGraph::index(std::string_view node) const {
    if (auto v = find(node); v && !is_synthetic(*v)) return *v;
    throw Error(ErrorCode::unknown_node, "unknown node '" + std::string(node) + "'");
}

bool CausalGraph::contains(std::string_view node) const {
    auto v = find(node);
    return v && !is_synthetic(*v);
}

const NodeRole& CausalGraph::role(std::string_view node) const {
    return nodes_[index(node)].role;
}

NodeSet CausalGraph::collect_(const std::vector<bool>& mask, int exclude) const {
    NodeSet out;
    for (std::size_t v = 0; v < nodes_.size(); ++v)
        if (mask[v] && static_cast<int>(v) != exclude) out.insert(names_[v]);
    return out;
}

NodeSet CausalGraph::parents(std::string_view node) const {
    NodeSet out;
    for (int p : parents_[index(node)])
        if (!is_synthetic(p)) out.insert(names_[p]);
    return out;
}

NodeSet CausalGraph::children(std::string_view node) const {
    NodeSet out;
    for (int c : children_[index(node)]) out.insert(names_[c]);
    return out;
}

NodeSet CausalGraph::ancestors(std::string_view node) const {
    const int v = index(node);
    return collect_(ancestor_closure(std::span(&v, 1)), v);
}

NodeSet CausalGraph::descendants(std::string_view node) const {
    const int v = index(node);
    return collect_(descendant_closure(std::span(&v, 1)), v);
}

std::vector<bool> CausalGraph::ancestor_closure(std::span<const int> seeds) const {
    std::vector<bool> mask(size(), false);
    std::vector<int> stack(seeds.begin(), seeds.end());
    for (int s : seeds) mask[s] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int p : parents_[v])
            if (!mask[p]) {
                mask[p] = true;
                stack.push_back(p);
            }
    }
    return mask;
}

std::vector<bool> CausalGraph::descendant_closure(std::span<const int> seeds) const {
    std::vector<bool> mask(size(), false);
    std::vector<int> stack(seeds.begin(), seeds.end());
    for (int s : seeds) mask[s] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int c : children_[v])
            if (!mask[c]) {
                mask[c] = true;
                stack.push_back(c);
            }
    }
    return mask;
}

std::vector<std::string> CausalGraph::exposures() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.role.exposure) out.push_back(n.name);
    return out;
}

std::vector<std::string> CausalGraph::outcomes() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.role.outcome) out.push_back(n.name);
    return out;
}

NodeSet CausalGraph::adjusted() const {
    NodeSet out;
    for (const auto& n : nodes_)
        if (n.role.adjusted) out.insert(n.name);
    return out;
}

NodeSet CausalGraph::observed() const {
    NodeSet out;
    for (const auto& n : nodes_)
        if (!n.role.latent) out.insert(n.name);
    return out;
}

CausalGraph CausalGraph::mutilate_incoming(std::string_view node) const {
    index(node);
    std::vector<Edge> kept;
    for (const auto& e : edges_) {
        if (e.kind == EdgeKind::directed && e.to == node) continue;
        if (e.kind == EdgeKind::bidirected && (e.from == node || e.to == node)) continue;
        kept.push_back(e);
    }
    return build(name_ + "|do(" + std::string(node) + ")", nodes_, std::move(kept));
}

CausalGraph CausalGraph::mutilate_outgoing(std::string_view node) const {
    index(node);
    std::vector<Edge> kept;
    for (const auto& e : edges_)
        if (!(e.kind == EdgeKind::directed && e.from == node)) kept.push_back(e);
    return build(name_, nodes_, std::move(kept));
}

bool CausalGraph::structurally_equal(const CausalGraph& other) const {
    if (name_ != other.name_ || nodes_.size() != other.nodes_.size()) return false;
    for (const auto& n : nodes_) {
        if (!other.contains(n.name) || !(other.role(n.name) == n.role)) return false;
    }
    std::set<Edge> mine(edges_.begin(), edges_.end());
    std::set<Edge> theirs(other.edges_.begin(), other.edges_.end());
    return mine == theirs;
}

std::vector<std::pair<int, int>> CausalGraph::canonical_edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t v = 0; v < size(); ++v)
        for (int c : children_[v]) out.emplace_back(static_cast<int>(v), c);
    std::sort(out.begin(), out.end(), [&](auto a, auto b) {
        return std::tie(names_[a.first], names_[a.second]) <
               std::tie(names_[b.first], names_[b.second]);
    });
    return out;
}

std::string CausalGraph::display_name(int v) const {
    if (!is_synthetic(v)) return names_[v];
    std::string a = names_[children_[v][0]];
    std::string b = names_[children_[v][1]];
    if (b < a) std::swap(a, b);
    return "U[" + a + "<->" + b + "]";
}

} // namespace egp

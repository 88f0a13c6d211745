#include "egp/separation.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>

#include "egp/error.hpp"

namespace egp {

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::query: return "query";
        case Provenance::local_markov: return "local-markov";
        case Provenance::global_basis: return "global-basis";
    }
    return "query";
}

namespace {

std::string braces(const NodeSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& v : s) {
        if (!first) out += ",";
        out += v;
        first = false;
    }
    return out + "}";
}

std::string plain(const NodeSet& s) {
    if (s.size() == 1) return *s.begin();
    return braces(s);
}

} // namespace

std::string CIStatement::to_string() const {
    return plain(a) + " _||_ " + plain(b) + " | " + (given.empty() ? "{}" : plain(given));
}

bool PathReport::directed() const {
    return std::all_of(arrows.begin(), arrows.end(), [](Arrow a) { return a == Arrow::forward; });
}

std::string PathReport::render() const {
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out += nodes[i];
        if (i < arrows.size()) {
            switch (arrows[i]) {
                case Arrow::forward: out += " -> "; break;
                case Arrow::backward: out += " <- "; break;
                case Arrow::bidirected: out += " <-> "; break;
            }
        }
    }
    return out;
}

namespace {

std::vector<int> resolve(const CausalGraph& g, const NodeSet& s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (const auto& v : s) out.push_back(g.index(v));
    return out;
}

void validate(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& given) {
    for (const auto* set : {&a, &b, &given})
        for (const auto& v : *set) g.index(v);
    if (a.empty() || b.empty())
        throw Error(ErrorCode::invalid_argument, "both sides of a separation query need a node");
    for (const auto& v : given)
        if (g.role(v).latent)
            throw Error(ErrorCode::condition_on_latent,
                        "cannot condition on latent node '" + v + "'");
    auto overlap = [](const NodeSet& x, const NodeSet& y) {
        for (const auto& v : x)
            if (y.contains(v)) return std::optional<std::string>(v);
        return std::optional<std::string>();
    };
    for (auto [x, y] : {std::pair{&a, &b}, std::pair{&a, &given}, std::pair{&b, &given}})
        if (auto v = overlap(*x, *y))
            throw Error(ErrorCode::invalid_argument, "node '" + *v + "' appears in two query sets");
}

// Nodes reachable from `sources` along active trails given `given`.
// Direction 0: arrived from a child (moving against edges); 1: from a parent.
std::vector<bool> reachable(const CausalGraph& g, const std::vector<int>& sources,
                            const std::vector<bool>& in_given) {
    std::vector<int> given_ids;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (in_given[v]) given_ids.push_back(static_cast<int>(v));
    const auto anc = g.ancestor_closure(given_ids);

    std::vector<std::array<bool, 2>> visited(g.size(), {false, false});
    std::vector<bool> reached(g.size(), false);
    std::deque<std::pair<int, int>> queue;
    for (int s : sources) queue.emplace_back(s, 0);
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        if (visited[v][dir]) continue;
        visited[v][dir] = true;
        if (!in_given[v]) reached[v] = true;
        if (dir == 0) {
            if (in_given[v]) continue;
            for (int p : g.parent_ids(v)) queue.emplace_back(p, 0);
            for (int c : g.child_ids(v)) queue.emplace_back(c, 1);
        } else {
            if (!in_given[v])
                for (int c : g.child_ids(v)) queue.emplace_back(c, 1);
            if (anc[v])
                for (int p : g.parent_ids(v)) queue.emplace_back(p, 0);
        }
    }
    return reached;
}

std::vector<bool> mask_of(const CausalGraph& g, const NodeSet& s) {
    std::vector<bool> mask(g.size(), false);
    for (int v : resolve(g, s)) mask[v] = true;
    return mask;
}

struct Step {
    int node;
    Arrow arrow;
};

// Adjacency over declared nodes with synthetic latents collapsed to <->.
std::vector<std::vector<Step>> skeleton(const CausalGraph& g) {
    const auto n = g.declared_count();
    std::vector<std::vector<Step>> adj(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (int c : g.child_ids(static_cast<int>(v))) adj[v].push_back({c, Arrow::forward});
        for (int p : g.parent_ids(static_cast<int>(v))) {
            if (!g.is_synthetic(p)) {
                adj[v].push_back({p, Arrow::backward});
                continue;
            }
            for (int other : g.child_ids(p))
                if (other != static_cast<int>(v)) adj[v].push_back({other, Arrow::bidirected});
        }
    }
    return adj;
}

class PathWalker {
public:
    PathWalker(const CausalGraph& g, int source, int target, const NodeSet& given)
        : g_(g), adj_(skeleton(g)), source_(source), target_(target),
          in_given_(mask_of(g, given)), on_path_(g.declared_count(), false) {
        std::vector<int> ids;
        for (std::size_t v = 0; v < g.size(); ++v)
            if (in_given_[v]) ids.push_back(static_cast<int>(v));
        given_anc_ = g.ancestor_closure(ids);
    }

    std::size_t max_length() const { return g_.declared_count() - 1; }

    /// Paths with exactly `length` arrows, sorted.
    std::vector<PathReport> level(std::size_t length) {
        std::vector<PathReport> out;
        walk_(source_, length, [&] {
            out.push_back(annotate_());
            return false;
        });
        sort_(out);
        return out;
    }

    /// True when some path has more than `length` arrows.
    bool exists_longer_than(std::size_t length) {
        for (std::size_t l = length + 1; l <= max_length(); ++l) {
            bool found = false;
            walk_(source_, l, [&] { return found = true; });
            if (found) return true;
        }
        return false;
    }

    static void sort_(std::vector<PathReport>& paths) {
        std::sort(paths.begin(), paths.end(), [](const PathReport& x, const PathReport& y) {
            if (x.nodes.size() != y.nodes.size()) return x.nodes.size() < y.nodes.size();
            if (x.nodes != y.nodes) return x.nodes < y.nodes;
            return x.arrows < y.arrows;
        });
    }

private:
    // Depth-first walk; `emit` returns true to stop the search.
    bool walk_(int v, std::size_t remaining, const std::function<bool()>& emit) {
        if (v == target_) return remaining == 0 && emit();
        if (remaining == 0) return false;
        on_path_[v] = true;
        nodes_.push_back(v);
        bool stop = false;
        for (const auto& step : adj_[v]) {
            if (on_path_[step.node]) continue;
            arrows_.push_back(step.arrow);
            stop = walk_(step.node, remaining - 1, emit);
            arrows_.pop_back();
            if (stop) break;
        }
        nodes_.pop_back();
        on_path_[v] = false;
        return stop;
    }

    PathReport annotate_() const {
        PathReport r;
        for (int v : nodes_) r.nodes.push_back(g_.name_of(v));
        r.nodes.push_back(g_.name_of(target_));
        r.arrows = arrows_;
        bool open = true;
        for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i) {
            const int v = i < nodes_.size() ? nodes_[i] : target_;
            const bool head_left = arrows_[i - 1] != Arrow::backward;
            const bool head_right = arrows_[i] != Arrow::forward;
            if (head_left && head_right) {
                r.colliders.insert(r.nodes[i]);
                if (given_anc_[v]) r.openers.insert(r.nodes[i]);
                else open = false;
            } else if (in_given_[v]) {
                r.blockers.insert(r.nodes[i]);
                open = false;
            }
        }
        r.status = open ? PathStatus::open : PathStatus::blocked;
        return r;
    }

    const CausalGraph& g_;
    std::vector<std::vector<Step>> adj_;
    int source_;
    int target_;
    std::vector<bool> in_given_;
    std::vector<bool> given_anc_;
    std::vector<bool> on_path_;
    std::vector<int> nodes_;
    std::vector<Arrow> arrows_;
};

void validate_pair(const CausalGraph& g, const std::string& a, const std::string& b,
                   const NodeSet& given) {
    g.index(a);
    g.index(b);
    if (a == b) throw Error(ErrorCode::invalid_argument, "path endpoints must differ");
    validate(g, {a}, {b}, given);
}

} // namespace

bool d_separated(const CausalGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& given) {
    validate(g, a, b, given);
    const auto reached = reachable(g, resolve(g, a), mask_of(g, given));
    for (int v : resolve(g, b))
        if (reached[v]) return false;
    return true;
}

NodeSet d_connected_nodes(const CausalGraph& g, const NodeSet& a, const NodeSet& given) {
    for (const auto& v : given)
        if (g.role(v).latent)
            throw Error(ErrorCode::condition_on_latent, "cannot condition on latent node '" + v + "'");
    const auto sources = resolve(g, a);
    const auto reached = reachable(g, sources, mask_of(g, given));
    NodeSet out;
    for (std::size_t v = 0; v < g.declared_count(); ++v)
        if (reached[v] && !a.contains(g.name_of(static_cast<int>(v)))) out.insert(g.name_of(static_cast<int>(v)));
    return out;
}

PathEnumeration enumerate_paths(const CausalGraph& g, const std::string& a, const std::string& b,
                                const NodeSet& given, std::size_t limit) {
    validate_pair(g, a, b, given);
    if (limit == 0) throw Error(ErrorCode::invalid_argument, "path limit must be positive");
    PathWalker walker(g, g.index(a), g.index(b), given);
    PathEnumeration out;
    for (std::size_t len = 1; len <= walker.max_length(); ++len) {
        auto level = walker.level(len);
        for (auto& p : level) out.paths.push_back(std::move(p));
        if (out.paths.size() >= limit) {
            out.truncated = out.paths.size() > limit || walker.exists_longer_than(len);
            out.paths.resize(limit);
            break;
        }
    }
    return out;
}

std::optional<PathReport> first_open_path(const CausalGraph& g, const std::string& a,
                                          const std::string& b, const NodeSet& given) {
    validate_pair(g, a, b, given);
    if (d_separated(g, {a}, {b}, given)) return std::nullopt;
    PathWalker walker(g, g.index(a), g.index(b), given);
    for (std::size_t len = 1; len <= walker.max_length(); ++len)
        for (auto& p : walker.level(len))
            if (p.open()) return p;
    return std::nullopt;
}

std::vector<PathReport> directed_paths(const CausalGraph& g, const std::string& a,
                                       const std::string& b, const NodeSet& given) {
    validate_pair(g, a, b, given);
    const int target = g.index(b);
    std::vector<PathReport> out;
    std::vector<int> stack{g.index(a)};
    std::function<void(int)> walk = [&](int v) {
        if (v == target) {
            PathReport r;
            for (int u : stack) r.nodes.push_back(g.name_of(u));
            r.arrows.assign(stack.size() - 1, Arrow::forward);
            for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i)
                if (given.contains(r.nodes[i])) r.blockers.insert(r.nodes[i]);
            r.status = r.blockers.empty() ? PathStatus::open : PathStatus::blocked;
            out.push_back(std::move(r));
            return;
        }
        for (int c : g.child_ids(v)) {
            stack.push_back(c);
            walk(c);
            stack.pop_back();
        }
    };
    walk(stack.front());
    PathWalker::sort_(out);
    return out;
}

} // namespace egp

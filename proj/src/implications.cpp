#include "egp/implications.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "egp/error.hpp"

namespace egp {

std::vector<CIStatement> local_markov(const CausalGraph& g) {
    std::vector<CIStatement> out;
    std::set<std::tuple<std::string, std::string, NodeSet>> pairwise;
    for (int v : g.topological_order()) {
        if (g.is_latent(v)) continue;
        CIStatement stmt;
        stmt.provenance = Provenance::local_markov;
        stmt.a = {g.name_of(v)};
        bool testable = true;
        for (int p : g.parent_ids(v)) {
            if (g.is_latent(p)) testable = false;
            stmt.given.insert(g.name_of(p));
        }
        if (!testable) continue;
        const auto desc = g.descendant_closure(std::span(&v, 1));
        for (std::size_t u = 0; u < g.declared_count(); ++u) {
            const auto& name = g.name_of(static_cast<int>(u));
            if (desc[u] || g.is_latent(static_cast<int>(u)) || stmt.given.contains(name)) continue;
            stmt.b.insert(name);
        }
        if (stmt.b.empty()) continue;
        if (stmt.b.size() == 1) {
            const auto& other = *stmt.b.begin();
            if (pairwise.contains({other, g.name_of(v), stmt.given})) continue;
            pairwise.insert({g.name_of(v), other, stmt.given});
        }
        out.push_back(std::move(stmt));
    }
    return out;
}

std::vector<CIStatement> implied_independencies(const CausalGraph& g, std::size_t max_cond) {
    std::vector<std::string> observed;
    for (const auto& name : g.observed()) observed.push_back(name);

    std::vector<CIStatement> out;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        for (std::size_t j = i + 1; j < observed.size(); ++j) {
            std::vector<std::string> pool;
            for (const auto& v : observed)
                if (v != observed[i] && v != observed[j]) pool.push_back(v);
            std::vector<NodeSet> kept;
            const auto largest = std::min(max_cond, pool.size());
            for (std::size_t k = 0; k <= largest; ++k) {
                std::vector<bool> pick(pool.size(), false);
                std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
                // prev_permutation over a descending mask walks subsets lexicographically.
                do {
                    NodeSet z;
                    for (std::size_t t = 0; t < pool.size(); ++t)
                        if (pick[t]) z.insert(pool[t]);
                    bool redundant = false;
                    for (const auto& prior : kept)
                        redundant = redundant || std::includes(z.begin(), z.end(), prior.begin(), prior.end());
                    if (!redundant && d_separated(g, {observed[i]}, {observed[j]}, z)) {
                        kept.push_back(z);
                        out.push_back({{observed[i]}, {observed[j]}, z, Provenance::global_basis});
                    }
                } while (std::prev_permutation(pick.begin(), pick.end()));
            }
        }
    }
    return out;
}

Factorization truncated_factorization(const CausalGraph& g,
                                      const std::map<std::string, std::string>& do_values) {
    Factorization f;
    std::vector<std::string> symbol(g.size());
    std::vector<bool> fixed(g.size(), false);
    for (const auto& [node, value] : do_values) {
        const int v = g.index(node);
        fixed[v] = true;
        symbol[v] = value;
        f.intervened.insert(node);
    }

    std::vector<std::string> joint;
    for (int v : g.topological_order()) {
        if (fixed[v]) continue;
        Factor factor{g.display_name(v), {}};
        for (int p : g.parent_ids(v)) factor.parents.push_back(fixed[p] ? symbol[p] : g.display_name(p));
        std::sort(factor.parents.begin(), factor.parents.end());
        joint.push_back(factor.child);
        f.factors.push_back(std::move(factor));
    }
    std::sort(joint.begin(), joint.end());

    std::string& out = f.rendered;
    out = "P(";
    for (std::size_t i = 0; i < joint.size(); ++i) out += (i ? "," : "") + joint[i];
    if (!do_values.empty()) {
        out += " | do(";
        bool first = true;
        for (const auto& [node, value] : do_values) {
            out += (first ? "" : ",") + node + "=" + value;
            first = false;
        }
        out += ")";
    }
    out += ") =";
    if (f.factors.empty()) out += " 1";
    for (const auto& factor : f.factors) {
        out += " P(" + factor.child;
        for (std::size_t i = 0; i < factor.parents.size(); ++i) out += (i ? "," : "|") + factor.parents[i];
        out += ")";
    }
    return f;
}

Factorization truncated_factorization(const CausalGraph& g, const NodeSet& do_set) {
    std::map<std::string, std::string> values;
    for (const auto& v : do_set) {
        std::string lower = v;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        values.emplace(v, lower);
    }
    return truncated_factorization(g, values);
}

} // namespace egp

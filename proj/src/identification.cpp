#include "egp/identification.hpp"

#include <algorithm>

#include "egp/error.hpp"

namespace egp {

std::string_view violation_name(AdjustmentViolation v) {
    switch (v) {
        case AdjustmentViolation::blocks_causal_path: return "blocks-causal-path";
        case AdjustmentViolation::open_backdoor: return "open-backdoor";
        case AdjustmentViolation::contains_descendant: return "contains-descendant";
        case AdjustmentViolation::contains_latent: return "contains-latent";
    }
    return "unknown";
}

namespace {

void require_pair(const CausalGraph& g, const std::string& exposure, const std::string& outcome) {
    g.index(exposure);
    g.index(outcome);
    if (exposure == outcome)
        throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
}

void require_observed_set(const CausalGraph& g, const NodeSet& z, std::initializer_list<const std::string*> excluded) {
    for (const auto& v : z) {
        if (g.role(v).latent)
            throw Error(ErrorCode::latent_in_set, "latent node '" + v + "' cannot be conditioned on");
        for (const auto* e : excluded)
            if (v == *e)
                throw Error(ErrorCode::invalid_argument, "set may not contain '" + v + "'");
    }
}

// Combinations of `pool` of size k in lexicographic order.
template <class Visit>
bool for_each_combination(const std::vector<std::string>& pool, std::size_t k, Visit&& visit) {
    if (k > pool.size()) return true;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        NodeSet s;
        for (auto i : idx) s.insert(pool[i]);
        if (!visit(s)) return false;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
        if (i == 0) return true;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

std::vector<PathReport> causal_paths(const CausalGraph& g, const std::string& exposure,
                                     const std::string& outcome) {
    require_pair(g, exposure, outcome);
    return directed_paths(g, exposure, outcome);
}

AdjustmentVerdict backdoor_admissible(const CausalGraph& g, const std::string& exposure,
                                      const std::string& outcome, const NodeSet& z) {
    require_pair(g, exposure, outcome);
    for (const auto& v : z) g.index(v);
    require_observed_set(g, z, {&exposure, &outcome});

    AdjustmentVerdict verdict;
    const auto desc = g.descendants(exposure);
    for (const auto& v : z)
        if (desc.contains(v)) verdict.offending.insert(v);
    if (!verdict.offending.empty()) {
        for (auto& path : directed_paths(g, exposure, outcome, z)) {
            if (!path.open()) {
                verdict.violated = AdjustmentViolation::blocks_causal_path;
                verdict.witness = std::move(path);
                return verdict;
            }
        }
        verdict.violated = AdjustmentViolation::contains_descendant;
        return verdict;
    }

    const auto testing = g.mutilate_outgoing(exposure);
    if (!d_separated(testing, {exposure}, {outcome}, z)) {
        verdict.violated = AdjustmentViolation::open_backdoor;
        verdict.witness = first_open_path(testing, exposure, outcome, z);
        return verdict;
    }
    verdict.admissible = true;
    return verdict;
}

AdjustmentSearch minimal_adjustment_sets(const CausalGraph& g, const std::string& exposure,
                                         const std::string& outcome, std::size_t max_size,
                                         std::size_t max_count) {
    require_pair(g, exposure, outcome);
    AdjustmentSearch search;
    search.max_size = max_size;
    search.max_count = max_count;

    const auto desc = g.descendants(exposure);
    std::vector<std::string> pool;
    for (const auto& n : g.nodes()) {
        if (n.role.latent || n.name == exposure || n.name == outcome || desc.contains(n.name)) continue;
        pool.push_back(n.name);
        search.candidates.insert(n.name);
    }
    std::sort(pool.begin(), pool.end());

    const auto testing = g.mutilate_outgoing(exposure);
    const auto largest = std::min(max_size, pool.size());
    for (std::size_t k = 0; k <= largest && !search.truncated; ++k) {
        for_each_combination(pool, k, [&](const NodeSet& s) {
            for (const auto& found : search.sets)
                if (std::includes(s.begin(), s.end(), found.begin(), found.end())) return true;
            if (!d_separated(testing, {exposure}, {outcome}, s)) return true;
            if (search.sets.size() == max_count) {
                search.truncated = true;
                return false;
            }
            search.sets.push_back(s);
            return true;
        });
    }
    search.exhausted = !search.truncated && max_size >= pool.size();
    return search;
}

IvVerdict iv_check(const CausalGraph& g, const std::string& instrument, const std::string& exposure,
                   const std::string& outcome, const NodeSet& given) {
    require_pair(g, exposure, outcome);
    g.index(instrument);
    if (instrument == exposure || instrument == outcome)
        throw Error(ErrorCode::invalid_argument, "instrument must differ from exposure and outcome");
    for (const auto& v : given) g.index(v);
    require_observed_set(g, given, {&instrument, &exposure, &outcome});

    IvVerdict verdict;
    verdict.relevant = !d_separated(g, {instrument}, {exposure}, given);
    const auto intervened = g.mutilate_incoming(exposure);
    verdict.excluded_and_exogenous = d_separated(intervened, {instrument}, {outcome}, given);
    if (!verdict.excluded_and_exogenous)
        verdict.witness = first_open_path(intervened, instrument, outcome, given);
    verdict.valid = verdict.relevant && verdict.excluded_and_exogenous;
    return verdict;
}

} // namespace egp

#pragma once

#include <map>
#include <string>
#include <vector>

#include "egp/graph.hpp"
#include "egp/separation.hpp"

namespace egp {

inline constexpr std::size_t kDefaultMaxConditioning = 3;

/// v ⊥ non-descendants \ parents | parents, for every node whose statement
/// only mentions observed variables. Mirror-image pairwise duplicates are
/// dropped.
std::vector<CIStatement> local_markov(const CausalGraph& g);

/// Pairwise d-separations over observed nodes with |given| <= max_cond,
/// keeping only minimal conditioning sets per pair.
std::vector<CIStatement> implied_independencies(const CausalGraph& g,
                                                std::size_t max_cond = kDefaultMaxConditioning);

struct Factor {
    std::string child;
    std::vector<std::string> parents;  // display names, sorted
};

struct Factorization {
    std::vector<Factor> factors;  // topological order, name tie-break
    NodeSet intervened;
    std::string rendered;
};

/// Product of per-node conditionals with the factors of intervened nodes
/// removed. `do_values` maps an intervened node to the symbol rendered in
/// its children's factors.
Factorization truncated_factorization(const CausalGraph& g,
                                      const std::map<std::string, std::string>& do_values = {});

/// Same, rendering each intervened node V by its lower-cased name.
Factorization truncated_factorization(const CausalGraph& g, const NodeSet& do_set);

} // namespace egp

#pragma once

// Optimizers and baselines. Each drives an OracleSession from scratch to the
// optimum and reports the query count at which the optimum was first queried.
//
// All of them stop querying as soon as the optimum answer is observed, so a
// finished run's query_count equals its RunResult.queries. Exceeding the
// session's safety budget raises BudgetExhausted, which the harness records
// as truncation.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lobb/bitstring.hpp"
#include "lobb/operators.hpp"
#include "lobb/oracle.hpp"
#include "lobb/rng.hpp"

namespace lobb {

// A pair (x, y) with fitness(x) >= fitness(y) = ell that agrees on exactly
// the ell positions sigma(1..ell); those positions are frozen and never
// flipped again.
struct EncodingPair {
    BitString x;
    BitString y;
    int ell = 0;
};

EncodingPair make_encoding_pair(BitString x, BitString y);

struct RunResult {
    std::uint64_t queries = 0;
    bool success = false;
};

// Test instrumentation. `rank` is the sigma-rank being learned (ell+c), so a
// peeking test can assert sigma(rank) is always among the candidates and is
// the identified singleton.
struct RunHooks {
    std::function<void(const EncodingPair&)> on_pair;
    std::function<void(int rank, const std::vector<int>& candidates)> on_candidates;
    std::function<void(int rank, int position)> on_identified;
    // Retain phase-2 sample flip sets per level (for bookkeeping-equivalence
    // tests); called once per block with X_c for c = 1..k.
    std::function<void(const std::vector<std::vector<std::vector<int>>>& level_samples)> on_block_samples;
};

// Block length ceil(sqrt(log2 n)).
int block_length(int n);

struct EncodedEaResult {
    BitString y_prime;
    int fitness = 0;
    std::uint64_t queries = 0;  // spent by this call
};

// The (x,y)-encoded (1+1) EA with mutation probability 1/k: repeatedly flips
// each non-frozen position of the current champion with probability 1/k,
// accepting strict improvements, until the champion's fitness reaches
// `target` (callers cap target at n). Returns pair.y untouched if
// pair.ell >= target.
EncodedEaResult encoded_opo_ea(OracleSession& session, const EncodingPair& pair, int k,
                               int target, Rng& rng, VariationTrace* trace = nullptr);

// (1+1) EA baseline: uniform start, standard bit mutation with rate
// mutation_p (default 1/n), accept iff fitness does not decrease.
RunResult opo_ea_baseline(OracleSession& session, Rng& rng, double mutation_p = 0.0);

// O(n log n) baseline: learns one critical position at a time by halving the
// set of candidate positions with subset-flip membership queries. Works in
// both VALUE and RANKING sessions.
RunResult binary_search_baseline(OracleSession& session, Rng& rng,
                                 const RunHooks* hooks = nullptr);

// Block-learning optimizer keeping, per level, the set of samples observed
// at that level (arbitrary arity: folds use raw position flips).
RunResult star_ary_optimizer(OracleSession& session, Rng& rng,
                             const RunHooks* hooks = nullptr, VariationTrace* trace = nullptr);

// Same block structure, but per-level bookkeeping lives in one tracker
// string whose agreement set with y' is the candidate set; every variation
// consumes at most 3 stored strings.
RunResult three_ary_optimizer(OracleSession& session, Rng& rng,
                              const RunHooks* hooks = nullptr, VariationTrace* trace = nullptr);

// 3-ary optimizer against a RANKING session: levels are identified from rank
// slots above the block plateau, comparisons use consecutive re-queries.
RunResult ranking_optimizer(OracleSession& session, Rng& rng,
                            const RunHooks* hooks = nullptr, VariationTrace* trace = nullptr);

}  // namespace lobb

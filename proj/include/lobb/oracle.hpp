#pragma once

// Query-counted oracle sessions.
//
// A session guards one Instance: algorithms see only query answers, never z
// or sigma. Every answered query increments query_count by exactly one, and
// the index of the first query that hits the optimum is recorded.
//
// Modes:
//   kValue   - answers are fitness values in [0..n].
//   kRanking - answers are dense ranks of the latest query's fitness among
//              all distinct fitness values queried so far (smallest = 1,
//              ties share a rank). The session answers only about the most
//              recent query; earlier ranks may be stale by later insertions.
//
// Besides the definitional full-string path (`query`), the session offers
// answer-equivalent fast paths for structured queries:
//   * registered bases + `query_offset(base, flips)` evaluates base xor
//     e_flips in O(|flips|);
//   * sampling contexts + `query_sampled` draw a product-Bernoulli flip set
//     over a fixed position set lazily in sigma-rank order (deferred
//     decisions), so a query costs O(expected walk) instead of O(n); the
//     caller can probe individual coin outcomes of the pending sample or
//     materialize its full flip set afterwards.
// The fast paths reveal exactly the same information as materializing the
// string and calling `query`: the answer, plus (for sampled queries) the
// caller's own randomness outcomes.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lobb/instance.hpp"

namespace lobb {

enum class OracleMode { kValue, kRanking };

// Thrown when a query would exceed the session's safety budget. The harness
// reports it as truncation; it is never silent.
struct BudgetExhausted : std::runtime_error {
    explicit BudgetExhausted(std::uint64_t budget)
        : std::runtime_error("query budget exhausted (" + std::to_string(budget) + ")") {}
};

class OracleSession {
public:
    using BaseId = int;
    using ContextId = int;

    OracleSession(Instance instance, OracleMode mode);

    int dimension() const { return instance_.n; }
    OracleMode mode() const { return mode_; }

    void set_query_budget(std::uint64_t budget) { budget_ = budget; }

    // Strictly monotone transform applied to fitness values before any
    // ranking bookkeeping (instrumentation for invariance tests; identity by
    // default). Must be set before the first query.
    void set_ranking_transform(std::function<long long(int)> f);

    // Records a 64-bit content hash of every answered query string.
    void enable_query_log() { log_enabled_ = true; }
    const std::vector<std::uint64_t>& query_log() const { return query_log_; }

    std::uint64_t query_count() const { return query_count_; }
    std::optional<std::uint64_t> optimum_query_index() const { return optimum_query_index_; }
    bool optimum_found() const { return optimum_query_index_.has_value(); }

    // Raw fitness values in query order; kept only in kRanking mode.
    const std::vector<int>& value_history() const { return history_; }

    // Dense rank of `fitness` among the distinct values seen so far:
    // 1 + number of distinct values strictly smaller. Requires kRanking mode
    // and that `fitness` has already been appended to the history.
    int rank_of(int fitness) const;

    // ---- definitional query path ----
    int query(const BitString& x);

    // ---- registered bases (delta queries) ----
    BaseId register_base(const BitString& base);
    BaseId clone_base(BaseId id);
    void release_base(BaseId id);
    // base <- base xor e_positions (positions distinct, 1-indexed).
    void flip_base(BaseId id, std::span<const int> positions);
    // Answers for base xor e_flips without materializing it.
    int query_offset(BaseId id, std::span<const int> flips);

    // ---- lazily sampled queries ----
    // A context fixes (base, position set, flip probability p). Each
    // query_sampled draws w = base xor Bernoulli_p(position set) and answers
    // for w; coins are drawn from `rng` on demand, in sigma-rank order for
    // the fitness walk and individually for probes.
    ContextId make_sampling_context(BaseId base, std::span<const int> positions, double p);
    void release_sampling_context(ContextId id);
    // Context maintenance for long runs: shrink the position set in place or
    // point the context at another registered base.
    void context_remove_positions(ContextId id, std::span<const int> positions);
    void context_rebind_base(ContextId id, BaseId base);
    int query_sampled(ContextId id, Rng& rng);
    // Coin outcome of the pending sample at `position` (must belong to the
    // context's position set). Valid until the next query of any kind.
    bool pending_flip_at(int position, Rng& rng);
    // Full flip set of the pending sample, in sigma-rank order (callers sort
    // when they need position order).
    std::vector<int> pending_flips(Rng& rng);

private:
    // Disagreement set of a registered base, as a rank-indexed bitmask.
    struct Base {
        std::vector<std::uint64_t> words;  // bit (r-1) set iff base disagrees with z at rank r
        int hint = 0;                      // first possibly-nonzero word
        std::uint64_t zkey = 0;
        bool live = false;

        bool test(int r) const { return (words[static_cast<std::size_t>(r - 1) >> 6] >> ((r - 1) & 63)) & 1u; }
        void toggle(int r) {
            const int w = (r - 1) >> 6;
            words[static_cast<std::size_t>(w)] ^= 1ULL << ((r - 1) & 63);
            if (w < hint) hint = w;
        }
        // Smallest set rank >= r, or 0 if none.
        int first_set_from(int r) const;
        int first_set() const;
    };
    struct Context {
        BaseId base = -1;
        std::vector<int> ranks;        // ranks of the position set, ascending
        std::vector<int> idx_of_rank;  // rank -> index in `ranks`, -1 if absent
        double p = 0.0;
        double inv_log1mp = 0.0;       // 1 / log(1-p) for geometric skips
        bool live = false;
    };
    struct Pending {
        ContextId ctx = -1;
        // Indices into ctx.ranks decided so far; flipped ones listed sorted.
        std::vector<int> flipped_idx;
        int decided_upto = -1;  // every index <= this is decided
        int beyond_count = 0;   // probes answered past the walk (epoch-stamped)
        bool valid = false;
    };
    int geometric_skip(const Context& ctx, Rng& rng) const;
    void bulk_coins(const Context& ctx, int from_idx, Rng& rng, std::vector<int>& out_idx) const;

    int fitness_of(const BitString& x) const { return evaluate(instance_, x); }
    int fitness_of_offset(const Base& b, std::span<const int> flips);
    int answer(int fitness, std::uint64_t zkey_of_query);
    void invalidate_pending() { pending_.valid = false; }
    std::uint64_t zobrist_of(const BitString& x) const;
    const Base& checked_base(BaseId id) const;
    int rank_of_position(int pos) const { return inv_sigma_[static_cast<std::size_t>(pos - 1)]; }

    Instance instance_;
    OracleMode mode_;
    std::vector<int> inv_sigma_;        // position -> rank
    std::vector<std::uint64_t> zobrist_;  // per-position toggle codes (fixed by n)

    std::uint64_t query_count_ = 0;
    std::optional<std::uint64_t> optimum_query_index_;
    std::optional<std::uint64_t> budget_;

    std::vector<int> history_;                 // ranking mode only
    std::vector<long long> distinct_sorted_;   // transformed values, ascending
    std::function<long long(int)> transform_;

    bool log_enabled_ = false;
    std::vector<std::uint64_t> query_log_;

    std::vector<Base> bases_;
    std::vector<Context> contexts_;
    Pending pending_;
    std::vector<std::uint8_t> scratch_mark_;  // per-position marks for offset queries

    // Per-rank coin bookkeeping for the pending sample, epoch-stamped so a
    // new sample invalidates everything in O(1).
    std::uint64_t pending_epoch_ = 0;
    std::vector<std::uint64_t> flip_epoch_;   // rank r flipped in the current pending
    std::vector<std::uint64_t> probe_epoch_;  // rank r probed past the walk
    std::vector<std::uint8_t> probe_coin_;
};

}  // namespace lobb

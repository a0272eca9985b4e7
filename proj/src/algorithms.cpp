#include "lobb/algorithms.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lobb {

namespace {

RunResult finished(const OracleSession& s) {
    const auto idx = s.optimum_query_index();
    if (!idx) throw std::logic_error("optimizer ended without reaching the optimum");
    return RunResult{*idx, true};
}

void intersect_sorted(std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(std::min(a.size(), b.size()));
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    a = std::move(out);
}

std::vector<int> all_positions(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    return v;
}

const OperatorDescriptor& kFlipDisagreementDesc() { return descriptor("flip_disagreement_independently"); }
const OperatorDescriptor& kFlipWhereEqualDesc() { return descriptor("flip_where_equal"); }
const OperatorDescriptor& kFlipWhereAllEqualDesc() { return descriptor("flip_where_all_equal"); }
const OperatorDescriptor& kFlipPositionsDesc() { return descriptor("flip_positions"); }

// Encoded (1+1) EA engine over a sampling context whose base is the
// champion; the champion base is mutated in place on acceptance.
struct EaState {
    OracleSession::BaseId base;
    BitString bits;
    int fitness;
    std::uint64_t queries = 0;
};

// Value mode: run until fitness(champion) >= target.
void run_value_ea(OracleSession& s, OracleSession::ContextId ctx, EaState& champ, int target,
                  Rng& rng, VariationTrace* trace) {
    while (champ.fitness < target) {
        if (trace) trace->record(kFlipDisagreementDesc());
        const int f = s.query_sampled(ctx, rng);
        ++champ.queries;
        if (f > champ.fitness) {
            const std::vector<int> flips = s.pending_flips(rng);
            s.flip_base(champ.base, flips);
            for (int pos : flips) champ.bits.flip(pos);
            champ.fitness = f;
        }
    }
}

enum class Scheme { kStar, kThreeAry };

RunResult run_value_blocks(OracleSession& s, Rng& rng, const RunHooks* hooks,
                           VariationTrace* trace, Scheme scheme) {
    const int n = s.dimension();
    const int k = block_length(n);
    if (n < 16 || k < 2) return binary_search_baseline(s, rng);

    BitString x = uniform_sample(n, rng, trace);
    int fx = s.query(x);
    if (s.optimum_found()) return finished(s);
    BitString y = complement(x, trace);
    int fy = s.query(y);
    if (s.optimum_found()) return finished(s);
    if (fy >= fx) {
        std::swap(x, y);
        std::swap(fx, fy);
    }
    auto bx = s.register_base(x);
    auto by = s.register_base(y);
    std::vector<int> open = all_positions(n);
    int ell = 0;
    const int full_span = (n / k) * k;

    // One champion register and one sampling context for the whole run; the
    // context's position set shrinks as blocks are folded.
    auto champ_base = s.clone_base(by);
    const auto ctx = s.make_sampling_context(champ_base, open, 1.0 / k);

    while (ell + k <= full_span) {
        // Phase 1: raise a champion to fitness >= ell + k.
        {
            // champion restarts from y
            s.release_base(champ_base);
            champ_base = s.clone_base(by);
            s.context_rebind_base(ctx, champ_base);
        }
        EaState champ{champ_base, y, fy, 0};
        run_value_ea(s, ctx, champ, std::min(ell + k, n), rng, trace);
        if (s.optimum_found()) return finished(s);

        // Phase 2: whittle the candidate set for each of sigma(ell+1..ell+k)
        // by sampling around the champion.
        std::vector<std::vector<int>> candidates(static_cast<std::size_t>(k));
        std::vector<char> have(static_cast<std::size_t>(k), 0);
        const bool retain = scheme == Scheme::kStar && hooks && hooks->on_block_samples;
        std::vector<std::vector<std::vector<int>>> retained;
        if (retain) retained.assign(static_cast<std::size_t>(k), {});

        auto all_singleton = [&]() {
            for (int c = 0; c < k; ++c)
                if (!have[static_cast<std::size_t>(c)] || candidates[static_cast<std::size_t>(c)].size() > 1)
                    return false;
            return true;
        };
        while (!all_singleton()) {
            if (trace) trace->record(kFlipDisagreementDesc());
            const int f = s.query_sampled(ctx, rng);
            if (s.optimum_found()) return finished(s);
            if (f < ell || f > ell + k - 1) continue;  // outside the block's levels: discarded
            const auto c = static_cast<std::size_t>(f - ell);
            if (scheme == Scheme::kThreeAry && trace) trace->record(kFlipWhereAllEqualDesc());
            if (retain) {
                std::vector<int> flips = s.pending_flips(rng);
                std::sort(flips.begin(), flips.end());
                retained[c].push_back(flips);
                if (!have[c]) {
                    candidates[c] = flips;
                    have[c] = 1;
                } else {
                    intersect_sorted(candidates[c], flips);
                }
            } else if (!have[c]) {
                candidates[c] = s.pending_flips(rng);
                have[c] = 1;
            } else {
                std::vector<int> kept;
                kept.reserve(candidates[c].size());
                for (int pos : candidates[c])
                    if (s.pending_flip_at(pos, rng)) kept.push_back(pos);
                candidates[c] = std::move(kept);
            }
            if (candidates[c].empty())
                throw std::logic_error("value-mode candidate set emptied");
            if (hooks && hooks->on_candidates) hooks->on_candidates(ell + static_cast<int>(c) + 1, candidates[c]);
        }
        if (retain) hooks->on_block_samples(retained);

        // Phase 3: fold each learned position into the pair, flipping
        // whichever string is currently behind.
        std::vector<int> learned;
        learned.reserve(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            const int j = candidates[static_cast<std::size_t>(c)][0];
            learned.push_back(j);
            if (hooks && hooks->on_identified) hooks->on_identified(ell + c + 1, j);
            const bool flip_y = (fy <= fx);
            if (trace) trace->record(scheme == Scheme::kStar ? kFlipPositionsDesc() : kFlipWhereEqualDesc());
            const int one[1] = {j};
            const auto tb = flip_y ? by : bx;
            const int f2 = s.query_offset(tb, one);
            s.flip_base(tb, one);
            (flip_y ? y : x).flip(j);
            (flip_y ? fy : fx) = f2;
            if (s.optimum_found()) return finished(s);
        }
        if (fy > fx) {
            std::swap(x, y);
            std::swap(fx, fy);
            std::swap(bx, by);
        }
        std::sort(learned.begin(), learned.end());
        std::vector<int> remaining;
        remaining.reserve(open.size() - learned.size());
        std::set_difference(open.begin(), open.end(), learned.begin(), learned.end(),
                            std::back_inserter(remaining));
        open = std::move(remaining);
        s.context_remove_positions(ctx, learned);
        ell += k;
        assert(fy == ell);
        if (hooks && hooks->on_pair) hooks->on_pair(EncodingPair{x, y, ell});
    }

    // Remaining < k positions: run the encoded EA straight to the optimum.
    if (!s.optimum_found()) {
        s.release_base(champ_base);
        champ_base = s.clone_base(by);
        s.context_rebind_base(ctx, champ_base);
        EaState champ{champ_base, y, fy, 0};
        run_value_ea(s, ctx, champ, n, rng, trace);
    }
    return finished(s);
}

int first_round_budget(int k) {
    return static_cast<int>(std::ceil(3.0 * std::exp(1.0) * k * std::log(static_cast<double>(k) + 1.0)));
}

}  // namespace

int block_length(int n) {
    if (n < 2) return 0;
    return static_cast<int>(std::ceil(std::sqrt(std::log2(static_cast<double>(n)))));
}

EncodingPair make_encoding_pair(BitString x, BitString y) {
    const int ell = static_cast<int>(agreement_set(x, y).size());
    return EncodingPair{std::move(x), std::move(y), ell};
}

EncodedEaResult encoded_opo_ea(OracleSession& session, const EncodingPair& pair, int k,
                               int target, Rng& rng, VariationTrace* trace) {
    if (session.mode() != OracleMode::kValue)
        throw std::logic_error("encoded_opo_ea: value-mode sessions only");
    if (k < 1) throw std::invalid_argument("encoded_opo_ea: k must be >= 1");
    if (target > session.dimension())
        throw std::invalid_argument("encoded_opo_ea: target exceeds dimension");
    if (pair.ell != static_cast<int>(agreement_set(pair.x, pair.y).size()))
        throw std::invalid_argument("encoded_opo_ea: pair.ell inconsistent with the agreement set");

    EncodedEaResult out{pair.y, pair.ell, 0};
    if (pair.ell >= target) return out;

    std::vector<int> open;
    for (int pos = 1; pos <= pair.x.size(); ++pos)
        if (pair.x.bit(pos) != pair.y.bit(pos)) open.push_back(pos);

    const auto base = session.register_base(pair.y);
    const auto ctx = session.make_sampling_context(base, open, 1.0 / k);
    EaState champ{base, pair.y, pair.ell, 0};
    run_value_ea(session, ctx, champ, target, rng, trace);
    session.release_sampling_context(ctx);
    session.release_base(base);
    return EncodedEaResult{std::move(champ.bits), champ.fitness, champ.queries};
}

RunResult opo_ea_baseline(OracleSession& session, Rng& rng, double mutation_p) {
    const int n = session.dimension();
    const double p = (mutation_p > 0.0) ? mutation_p : 1.0 / n;
    if (p > 1.0) throw std::invalid_argument("opo_ea_baseline: mutation rate above 1");
    if (session.mode() != OracleMode::kValue)
        throw std::logic_error("opo_ea_baseline: value-mode sessions only");

    BitString x = uniform_sample(n, rng);
    int f = session.query(x);
    if (session.optimum_found()) return finished(session);

    const auto base = session.register_base(x);
    const std::vector<int> everything = all_positions(n);
    const auto ctx = session.make_sampling_context(base, everything, p);
    while (!session.optimum_found()) {
        const int f2 = session.query_sampled(ctx, rng);
        if (f2 >= f) {  // accept iff fitness does not decrease
            const std::vector<int> flips = session.pending_flips(rng);
            session.flip_base(base, flips);
            f = f2;
        }
    }
    return finished(session);
}

RunResult binary_search_baseline(OracleSession& session, Rng& rng, const RunHooks* hooks) {
    const int n = session.dimension();
    const bool ranking = session.mode() == OracleMode::kRanking;

    BitString x = uniform_sample(n, rng);
    const int ax = session.query(x);
    if (session.optimum_found()) return finished(session);
    BitString y = complement(x);
    const int ay = session.query(y);
    if (session.optimum_found()) return finished(session);
    // Complementary strings never tie: exactly one of them scores 0.
    const bool y_ahead = ranking ? (ay == 2) : (ay >= ax);
    int fx = y_ahead ? ay : ax;  // value mode only
    int fy = y_ahead ? ax : ay;
    if (y_ahead) std::swap(x, y);

    auto bx = session.register_base(x);
    auto by = session.register_base(y);
    std::vector<int> open = all_positions(n);
    int ell = 0;

    while (!session.optimum_found()) {
        // Halve the candidate set: flipping a subset S of y's open positions
        // improves y exactly when the critical position lies in S.
        std::vector<int> cand = open;
        while (cand.size() > 1) {
            const std::size_t half = cand.size() / 2;
            const std::span<const int> subset(cand.data(), half);
            bool improved;
            if (ranking) {
                const int a = session.query_offset(by, {});
                const int b = session.query_offset(by, subset);
                if (session.optimum_found()) return finished(session);
                improved = b > a;
            } else {
                const int f = session.query_offset(by, subset);
                if (session.optimum_found()) return finished(session);
                improved = f > ell;
            }
            if (improved) cand.resize(half);
            else cand.erase(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(half));
        }
        const int j = cand[0];
        if (hooks && hooks->on_identified) hooks->on_identified(ell + 1, j);

        const int one[1] = {j};
        if (ranking) {
            session.flip_base(by, one);
            y.flip(j);
            const int a2 = session.query_offset(bx, {});
            const int b2 = session.query_offset(by, {});
            if (session.optimum_found()) return finished(session);
            if (b2 > a2) {
                std::swap(x, y);
                std::swap(bx, by);
            }
        } else {
            const int f2 = session.query_offset(by, one);
            session.flip_base(by, one);
            y.flip(j);
            fy = f2;
            if (session.optimum_found()) return finished(session);
            if (fy > fx) {
                std::swap(x, y);
                std::swap(fx, fy);
                std::swap(bx, by);
            }
        }
        open.erase(std::find(open.begin(), open.end(), j));
        ++ell;
        if (hooks && hooks->on_pair) hooks->on_pair(EncodingPair{x, y, ell});
    }
    return finished(session);
}

RunResult star_ary_optimizer(OracleSession& session, Rng& rng, const RunHooks* hooks,
                             VariationTrace* trace) {
    return run_value_blocks(session, rng, hooks, trace, Scheme::kStar);
}

RunResult three_ary_optimizer(OracleSession& session, Rng& rng, const RunHooks* hooks,
                              VariationTrace* trace) {
    return run_value_blocks(session, rng, hooks, trace, Scheme::kThreeAry);
}

RunResult ranking_optimizer(OracleSession& session, Rng& rng, const RunHooks* hooks,
                            VariationTrace* trace) {
    if (session.mode() != OracleMode::kRanking)
        throw std::logic_error("ranking_optimizer: session must be in ranking mode");
    const int n = session.dimension();
    const int k = block_length(n);
    if (n < 16 || k < 2) return binary_search_baseline(session, rng);

    BitString x = uniform_sample(n, rng, trace);
    session.query(x);
    if (session.optimum_found()) return finished(session);
    BitString y = complement(x, trace);
    const int ry = session.query(y);
    if (session.optimum_found()) return finished(session);
    if (ry == 2) std::swap(x, y);  // rank 2 of 2 means f(y) > f(x)

    auto bx = session.register_base(x);
    auto by = session.register_base(y);
    std::vector<int> open = all_positions(n);
    int ell = 0;
    const int full_span = (n / k) * k;

    auto champ_base = session.clone_base(by);
    const auto ctx = session.make_sampling_context(champ_base, open, 1.0 / k);

    while (ell + k <= full_span) {
        // Block plateau: rank of f(y). Nothing queried in this block can
        // score below f(y), so this rank stays valid for the whole block.
        const int r0 = session.query_offset(by, {});

        // Phase 1: encoded EA; champion_rank - r0 >= k certifies that at
        // least k distinct values lie in (f(y), f(champion)], hence
        // f(champion) >= f(y) + k.
        {
            session.release_base(champ_base);
            champ_base = session.clone_base(by);
            session.context_rebind_base(ctx, champ_base);
        }
        int fresh_rank = r0;  // champion's rank if measured since the last query
        while (true) {
            const int a = (fresh_rank >= 0) ? fresh_rank : session.query_offset(champ_base, {});
            if (a - r0 >= k) break;
            if (trace) trace->record(kFlipDisagreementDesc());
            const int b = session.query_sampled(ctx, rng);
            if (session.optimum_found()) return finished(session);
            if (b > a) {  // consecutive answers: b > a iff the candidate improves
                session.flip_base(champ_base, session.pending_flips(rng));
                fresh_rank = b;
            } else {
                fresh_rank = -1;
            }
        }

        // Phase 2: one batch of samples around the champion, re-queried in a
        // single reading pass. Equal ranks in one frame mean equal fitness,
        // and equal values stay equal forever, so the tie-grouping into
        // classes is permanent even though rank labels shift later.
        std::vector<std::vector<int>> samples;
        std::vector<int> read_rank;
        // Classes in ascending value order: index list into `samples`.
        struct SampleClass {
            int rank = 0;
            std::vector<int> members;
            bool alive = true;
        };
        std::vector<SampleClass> classes;
        int batch_size = first_round_budget(k);

        auto draw_batch_and_read = [&]() -> bool {
            for (int i = 0; i < batch_size; ++i) {
                if (trace) trace->record(kFlipDisagreementDesc());
                session.query_sampled(ctx, rng);
                if (session.optimum_found()) return false;
                std::vector<int> flips = session.pending_flips(rng);
                std::sort(flips.begin(), flips.end());
                samples.push_back(std::move(flips));
            }
            // Reading pass over everything accumulated; re-queries insert
            // nothing, so all ranks live in one common frame.
            read_rank.clear();
            for (const auto& flips : samples) {
                read_rank.push_back(session.query_offset(champ_base, flips));
                if (session.optimum_found()) return false;
            }
            classes.clear();
            std::vector<int> order(samples.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return read_rank[static_cast<std::size_t>(a)] < read_rank[static_cast<std::size_t>(b)]; });
            for (int idx : order) {
                const int r = read_rank[static_cast<std::size_t>(idx)];
                if (classes.empty() || classes.back().rank != r) classes.push_back({r, {}, true});
                classes.back().members.push_back(idx);
            }
            return true;
        };
        if (!draw_batch_and_read()) return finished(session);

        // Learn and fold the k levels bottom-up. Each level is anchored on a
        // fresh re-query of the pair's lower string (fitness exactly
        // ell + c), matched against class representatives in the same frame;
        // a level with no matching class was simply never sampled, which
        // triggers a bigger batch rather than a wrong binding.
        std::vector<int> learned;
        for (int c = 0; c < k; ++c) {
            int plateau_rank = 0;
            bool lower_is_y = true;
            std::vector<int> tracker;
            while (true) {
                const int axr = session.query_offset(bx, {});
                const int ayr = session.query_offset(by, {});
                lower_is_y = (ayr <= axr);
                plateau_rank = std::min(axr, ayr);
                const SampleClass* matched = nullptr;
                for (auto& cl : classes) {
                    if (!cl.alive) continue;
                    const int rep = cl.members.front();
                    const int rr = session.query_offset(champ_base, samples[static_cast<std::size_t>(rep)]);
                    if (rr == plateau_rank) {
                        matched = &cl;
                        break;
                    }
                    if (rr > plateau_rank) break;   // this level was never sampled
                    cl.alive = false;               // below the plateau: stale class
                }
                if (matched != nullptr) {
                    tracker = samples[static_cast<std::size_t>(matched->members.front())];
                    if (trace) trace->record(kFlipWhereAllEqualDesc());
                    for (std::size_t i = 1; i < matched->members.size(); ++i) {
                        if (trace) trace->record(kFlipWhereAllEqualDesc());
                        intersect_sorted(tracker, samples[static_cast<std::size_t>(matched->members[i])]);
                    }
                    if (hooks && hooks->on_candidates) hooks->on_candidates(ell + c + 1, tracker);
                    break;
                }
                batch_size *= 2;
                if (!draw_batch_and_read()) return finished(session);
            }

            // Top up one sample at a time until the tracker is a singleton;
            // membership at this level is an exact consecutive-pair tie test
            // against the lower string.
            while (tracker.size() > 1) {
                const auto lower_base = lower_is_y ? by : bx;
                const int a = session.query_offset(lower_base, {});
                if (trace) trace->record(kFlipDisagreementDesc());
                const int b = session.query_sampled(ctx, rng);
                if (session.optimum_found()) return finished(session);
                if (b != a) continue;  // not at this level
                if (trace) trace->record(kFlipWhereAllEqualDesc());
                std::vector<int> kept;
                kept.reserve(tracker.size());
                for (int pos : tracker)
                    if (session.pending_flip_at(pos, rng)) kept.push_back(pos);
                tracker = std::move(kept);
                if (hooks && hooks->on_candidates) hooks->on_candidates(ell + c + 1, tracker);
                if (tracker.empty())
                    throw std::logic_error("ranking tracker emptied despite sound level binding");
            }

            const int j = tracker[0];
            learned.push_back(j);
            if (hooks && hooks->on_identified) hooks->on_identified(ell + c + 1, j);
            if (trace) trace->record(kFlipWhereEqualDesc());
            const int one[1] = {j};
            const auto tb = lower_is_y ? by : bx;
            session.query_offset(tb, one);
            if (session.optimum_found()) return finished(session);
            session.flip_base(tb, one);
            (lower_is_y ? y : x).flip(j);
        }

        // Reorder so y is the lower string for the next block.
        {
            const int fxr = session.query_offset(bx, {});
            const int fyr = session.query_offset(by, {});
            if (session.optimum_found()) return finished(session);
            if (fyr > fxr) {
                std::swap(x, y);
                std::swap(bx, by);
            }
        }
        std::sort(learned.begin(), learned.end());
        std::vector<int> remaining;
        remaining.reserve(open.size() - learned.size());
        std::set_difference(open.begin(), open.end(), learned.begin(), learned.end(),
                            std::back_inserter(remaining));
        open = std::move(remaining);
        session.context_remove_positions(ctx, learned);
        ell += k;
        if (hooks && hooks->on_pair) hooks->on_pair(EncodingPair{x, y, ell});
    }

    // Remaining < k positions: encoded EA straight to the optimum.
    if (!session.optimum_found()) {
        session.release_base(champ_base);
        champ_base = session.clone_base(by);
        session.context_rebind_base(ctx, champ_base);
        int fresh_rank = -1;
        while (!session.optimum_found()) {
            const int a = (fresh_rank >= 0) ? fresh_rank : session.query_offset(champ_base, {});
            if (trace) trace->record(kFlipDisagreementDesc());
            const int b = session.query_sampled(ctx, rng);
            if (session.optimum_found()) break;
            if (b > a) {
                session.flip_base(champ_base, session.pending_flips(rng));
                fresh_rank = b;
            } else {
                fresh_rank = -1;
            }
        }
    }
    return finished(session);
}

}  // namespace lobb

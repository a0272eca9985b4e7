#include "lobb/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <limits>

namespace lobb {

namespace {

// Toggle codes are a pure function of n so that sessions over equal-sized
// instances produce comparable query logs.
std::vector<std::uint64_t> make_zobrist(int n) {
    std::vector<std::uint64_t> codes(static_cast<std::size_t>(n));
    std::uint64_t s = 0x5EEDC0DE00000000ULL ^ static_cast<std::uint64_t>(n);
    for (auto& c : codes) {
        s = splitmix64(s);
        c = s;
    }
    return codes;
}

constexpr int kNoRank = std::numeric_limits<int>::max();

double uniform01_open(Rng& rng) {
    // (0, 1]: never 0, so log() below is finite.
    return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int OracleSession::Base::first_set_from(int r) const {
    const int nwords = static_cast<int>(words.size());
    int w = (r - 1) >> 6;
    if (w >= nwords) return 0;
    std::uint64_t cur = words[static_cast<std::size_t>(w)] >> ((r - 1) & 63);
    if (cur) return r + std::countr_zero(cur);
    for (++w; w < nwords; ++w) {
        if (words[static_cast<std::size_t>(w)])
            return w * 64 + 1 + std::countr_zero(words[static_cast<std::size_t>(w)]);
    }
    return 0;
}

int OracleSession::Base::first_set() const {
    const int nwords = static_cast<int>(words.size());
    int w = hint;
    while (w < nwords && !words[static_cast<std::size_t>(w)]) ++w;
    const_cast<Base*>(this)->hint = w;
    if (w >= nwords) return 0;
    return w * 64 + 1 + std::countr_zero(words[static_cast<std::size_t>(w)]);
}

int OracleSession::geometric_skip(const Context& ctx, Rng& rng) const {
    // Failures before the first success of a Bernoulli(p): exact geometric
    // law via one log per draw.
    const double u = uniform01_open(rng);
    const double v = std::log(u) * ctx.inv_log1mp;
    if (v >= 1e9) return std::numeric_limits<int>::max() / 2;
    return static_cast<int>(v);
}

void OracleSession::bulk_coins(const Context& ctx, int from_idx, Rng& rng, std::vector<int>& out_idx) const {
    // Independent Bernoulli(p) over indices [from_idx, m) of the context.
    // Dyadic p = 2^-s gets word-batched coins (s AND-ed 64-bit draws per 64
    // indices); everything else uses geometric skips.
    const int m = static_cast<int>(ctx.ranks.size());
    int shifts = 0;
    for (int s = 1; s <= 6; ++s) {
        if (ctx.p == std::ldexp(1.0, -s)) { shifts = s; break; }
    }
    if (shifts > 0) {
        for (int base = from_idx; base < m; base += 64) {
            std::uint64_t bits = rng();
            for (int s = 1; s < shifts; ++s) bits &= rng();
            const int remaining = m - base;
            if (remaining < 64) bits &= (remaining > 0 ? ((1ULL << remaining) - 1) : 0ULL);
            while (bits) {
                out_idx.push_back(base + std::countr_zero(bits));
                bits &= bits - 1;
            }
        }
        return;
    }
    int i = from_idx;
    while (i < m) {
        const int jump = geometric_skip(ctx, rng);
        if (jump >= m - i) break;
        i += jump;
        out_idx.push_back(i);
        ++i;
    }
}

OracleSession::OracleSession(Instance instance, OracleMode mode)
    : instance_(std::move(instance)),
      mode_(mode),
      inv_sigma_(static_cast<std::size_t>(instance_.n)),
      zobrist_(make_zobrist(instance_.n)),
      scratch_mark_(static_cast<std::size_t>(instance_.n) + 1, 0),
      flip_epoch_(static_cast<std::size_t>(instance_.n) + 1, 0),
      probe_epoch_(static_cast<std::size_t>(instance_.n) + 1, 0),
      probe_coin_(static_cast<std::size_t>(instance_.n) + 1, 0) {
    for (int j = 1; j <= instance_.n; ++j)
        inv_sigma_[static_cast<std::size_t>(instance_.sigma.of(j) - 1)] = j;
}

void OracleSession::set_ranking_transform(std::function<long long(int)> f) {
    if (query_count_ != 0) throw std::logic_error("set_ranking_transform: session already queried");
    transform_ = std::move(f);
}

int OracleSession::rank_of(int fitness) const {
    if (mode_ != OracleMode::kRanking) throw std::logic_error("rank_of: value-mode session");
    const long long t = transform_ ? transform_(fitness) : fitness;
    const auto it = std::lower_bound(distinct_sorted_.begin(), distinct_sorted_.end(), t);
    if (it == distinct_sorted_.end() || *it != t)
        throw std::logic_error("rank_of: fitness not in the value history");
    return static_cast<int>(it - distinct_sorted_.begin()) + 1;
}

int OracleSession::answer(int fitness, std::uint64_t zkey_of_query) {
    if (budget_ && query_count_ >= *budget_) throw BudgetExhausted(*budget_);
    ++query_count_;
    if (fitness == instance_.n && !optimum_query_index_) optimum_query_index_ = query_count_;
    if (log_enabled_) query_log_.push_back(zkey_of_query);
    if (mode_ == OracleMode::kValue) return fitness;

    history_.push_back(fitness);
    const long long t = transform_ ? transform_(fitness) : fitness;
    const auto it = std::lower_bound(distinct_sorted_.begin(), distinct_sorted_.end(), t);
    if (it == distinct_sorted_.end() || *it != t) distinct_sorted_.insert(it, t);
    return rank_of(fitness);
}

std::uint64_t OracleSession::zobrist_of(const BitString& x) const {
    std::uint64_t z = 0;
    for (int pos = 1; pos <= instance_.n; ++pos)
        if (x.bit(pos)) z ^= zobrist_[static_cast<std::size_t>(pos - 1)];
    return z;
}

int OracleSession::query(const BitString& x) {
    invalidate_pending();
    const int f = fitness_of(x);
    return answer(f, log_enabled_ ? zobrist_of(x) : 0);
}

OracleSession::BaseId OracleSession::register_base(const BitString& base) {
    if (base.size() != instance_.n) throw std::invalid_argument("register_base: length mismatch");
    Base b;
    b.live = true;
    b.zkey = log_enabled_ ? zobrist_of(base) : 0;
    b.words.assign(static_cast<std::size_t>((instance_.n + 63) / 64), 0);
    for (int r = 1; r <= instance_.n; ++r) {
        const int pos = instance_.sigma.of(r);
        if (base.bit(pos) != instance_.z.bit(pos))
            b.words[static_cast<std::size_t>(r - 1) >> 6] |= 1ULL << ((r - 1) & 63);
    }
    bases_.push_back(std::move(b));
    return static_cast<BaseId>(bases_.size() - 1);
}

const OracleSession::Base& OracleSession::checked_base(BaseId id) const {
    if (id < 0 || id >= static_cast<BaseId>(bases_.size()) || !bases_[static_cast<std::size_t>(id)].live)
        throw std::logic_error("oracle: bad base id");
    return bases_[static_cast<std::size_t>(id)];
}

OracleSession::BaseId OracleSession::clone_base(BaseId id) {
    Base copy = checked_base(id);
    bases_.push_back(std::move(copy));
    return static_cast<BaseId>(bases_.size() - 1);
}

void OracleSession::release_base(BaseId id) {
    Base& b = bases_.at(static_cast<std::size_t>(id));
    b.words.clear();
    b.words.shrink_to_fit();
    b.live = false;
}

void OracleSession::flip_base(BaseId id, std::span<const int> positions) {
    checked_base(id);
    invalidate_pending();  // the pending sample's base would change under it
    Base& b = bases_[static_cast<std::size_t>(id)];
    for (int pos : positions) {
        b.toggle(rank_of_position(pos));
        if (log_enabled_) b.zkey ^= zobrist_[static_cast<std::size_t>(pos - 1)];
    }
}

int OracleSession::fitness_of_offset(const Base& b, std::span<const int> flips) {
    // First disagreement rank of base xor e_flips: the minimum between the
    // lowest flip on an agreeing position and the lowest surviving base
    // disagreement.
    int best_flip = kNoRank;
    for (int pos : flips) {
        if (pos < 1 || pos > instance_.n) throw std::out_of_range("query_offset: position out of range");
        scratch_mark_[static_cast<std::size_t>(pos)] = 1;
        const int r = rank_of_position(pos);
        if (!b.test(r) && r < best_flip) best_flip = r;
    }
    int best_old = kNoRank;
    for (int r = b.first_set(); r != 0 && r < best_flip; r = b.first_set_from(r + 1)) {
        if (!scratch_mark_[static_cast<std::size_t>(instance_.sigma.of(r))]) {
            best_old = r;
            break;
        }
    }
    for (int pos : flips) scratch_mark_[static_cast<std::size_t>(pos)] = 0;
    const int first = std::min(best_flip, best_old);
    return (first == kNoRank) ? instance_.n : first - 1;
}

int OracleSession::query_offset(BaseId id, std::span<const int> flips) {
    const Base& b = checked_base(id);
    invalidate_pending();
    const int f = fitness_of_offset(b, flips);
    std::uint64_t zkey = 0;
    if (log_enabled_) {
        zkey = b.zkey;
        for (int pos : flips) zkey ^= zobrist_[static_cast<std::size_t>(pos - 1)];
    }
    return answer(f, zkey);
}

OracleSession::ContextId OracleSession::make_sampling_context(BaseId base, std::span<const int> positions, double p) {
    checked_base(base);
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("make_sampling_context: p outside [0,1]");
    Context c;
    c.base = base;
    c.p = p;
    c.inv_log1mp = (p > 0.0 && p < 1.0) ? 1.0 / std::log1p(-p) : 0.0;
    c.live = true;
    c.ranks.reserve(positions.size());
    for (int pos : positions) c.ranks.push_back(rank_of_position(pos));
    std::sort(c.ranks.begin(), c.ranks.end());
    c.idx_of_rank.assign(static_cast<std::size_t>(instance_.n) + 1, -1);
    for (std::size_t i = 0; i < c.ranks.size(); ++i)
        c.idx_of_rank[static_cast<std::size_t>(c.ranks[i])] = static_cast<int>(i);
    contexts_.push_back(std::move(c));
    return static_cast<ContextId>(contexts_.size() - 1);
}

void OracleSession::context_remove_positions(ContextId id, std::span<const int> positions) {
    Context& c = contexts_.at(static_cast<std::size_t>(id));
    if (!c.live) throw std::logic_error("oracle: bad sampling context");
    if (pending_.ctx == id) invalidate_pending();
    for (int pos : positions) {
        const int r = rank_of_position(pos);
        if (c.idx_of_rank[static_cast<std::size_t>(r)] < 0)
            throw std::logic_error("context_remove_positions: position not in context");
        c.idx_of_rank[static_cast<std::size_t>(r)] = -2;  // tombstone for the rebuild below
    }
    std::vector<int> remaining;
    remaining.reserve(c.ranks.size() - positions.size());
    for (int r : c.ranks)
        if (c.idx_of_rank[static_cast<std::size_t>(r)] != -2) remaining.push_back(r);
    c.ranks = std::move(remaining);
    std::fill(c.idx_of_rank.begin(), c.idx_of_rank.end(), -1);
    for (std::size_t i = 0; i < c.ranks.size(); ++i)
        c.idx_of_rank[static_cast<std::size_t>(c.ranks[i])] = static_cast<int>(i);
}

void OracleSession::context_rebind_base(ContextId id, BaseId base) {
    checked_base(base);
    Context& c = contexts_.at(static_cast<std::size_t>(id));
    if (!c.live) throw std::logic_error("oracle: bad sampling context");
    if (pending_.ctx == id) invalidate_pending();
    c.base = base;
}

void OracleSession::release_sampling_context(ContextId id) {
    Context& c = contexts_.at(static_cast<std::size_t>(id));
    c.ranks.clear();
    c.ranks.shrink_to_fit();
    c.idx_of_rank.clear();
    c.idx_of_rank.shrink_to_fit();
    c.live = false;
    if (pending_.ctx == id) invalidate_pending();
}

int OracleSession::query_sampled(ContextId id, Rng& rng) {
    if (id < 0 || id >= static_cast<ContextId>(contexts_.size()) || !contexts_[static_cast<std::size_t>(id)].live)
        throw std::logic_error("oracle: bad sampling context");
    const Context& ctx = contexts_[static_cast<std::size_t>(id)];
    const Base& b = checked_base(ctx.base);

    pending_.ctx = id;
    pending_.flipped_idx.clear();
    pending_.beyond_count = 0;
    pending_.decided_upto = -1;
    pending_.valid = true;
    ++pending_epoch_;

    const int m = static_cast<int>(ctx.ranks.size());
    auto push_flip = [&](int idx) {
        pending_.flipped_idx.push_back(idx);
        flip_epoch_[static_cast<std::size_t>(ctx.ranks[static_cast<std::size_t>(idx)])] = pending_epoch_;
    };

    // Walk flips in rank order against the base's disagreement ranks until
    // the first disagreement of the sampled string is located.
    int next_flip = -1;  // index into ctx.ranks
    int i = 0;           // next undecided index
    auto draw_next_flip = [&]() {
        if (ctx.p <= 0.0 || i >= m) { next_flip = m; return; }
        if (ctx.p >= 1.0) { next_flip = i; return; }
        const int jump = geometric_skip(ctx, rng);
        next_flip = (jump >= m - i) ? m : i + jump;
    };
    draw_next_flip();

    int dis_rank = b.first_set();
    int fitness;
    while (true) {
        const int flip_rank = (next_flip < m) ? ctx.ranks[static_cast<std::size_t>(next_flip)] : kNoRank;
        const int dr = (dis_rank != 0) ? dis_rank : kNoRank;
        if (flip_rank == kNoRank && dr == kNoRank) {
            fitness = instance_.n;
            break;
        }
        if (dr < flip_rank) {  // untouched disagreement
            fitness = dr - 1;
            break;
        }
        if (flip_rank < dr) {  // flip breaks an agreeing position
            push_flip(next_flip);
            pending_.decided_upto = next_flip;
            fitness = flip_rank - 1;
            break;
        }
        // flip fixes this disagreement
        push_flip(next_flip);
        pending_.decided_upto = next_flip;
        i = next_flip + 1;
        dis_rank = b.first_set_from(dis_rank + 1);
        draw_next_flip();
    }
    // The drawn jump is a committed batch of coins: everything before its
    // endpoint is not flipped, the endpoint (if inside range) is.
    if (next_flip >= m) {
        pending_.decided_upto = m - 1;
    } else if (pending_.flipped_idx.empty() || pending_.flipped_idx.back() != next_flip) {
        push_flip(next_flip);
        pending_.decided_upto = next_flip;
    }

    std::uint64_t zkey = 0;
    if (log_enabled_) {
        // Materialize the remaining coins so the log hashes a fully
        // determined string (test mode; draws from the same stream).
        std::vector<int> flips = pending_flips(rng);
        zkey = b.zkey;
        for (int pos : flips) zkey ^= zobrist_[static_cast<std::size_t>(pos - 1)];
    }
    return answer(fitness, zkey);
}

bool OracleSession::pending_flip_at(int position, Rng& rng) {
    if (!pending_.valid) throw std::logic_error("pending_flip_at: no pending sample");
    const Context& ctx = contexts_[static_cast<std::size_t>(pending_.ctx)];
    const int r = rank_of_position(position);
    const int idx = ctx.idx_of_rank[static_cast<std::size_t>(r)];
    if (idx < 0) throw std::logic_error("pending_flip_at: position not in the sampling context");
    if (idx <= pending_.decided_upto) return flip_epoch_[static_cast<std::size_t>(r)] == pending_epoch_;
    if (probe_epoch_[static_cast<std::size_t>(r)] == pending_epoch_)
        return probe_coin_[static_cast<std::size_t>(r)] != 0;
    const bool coin = uniform01_open(rng) <= ctx.p;
    probe_epoch_[static_cast<std::size_t>(r)] = pending_epoch_;
    probe_coin_[static_cast<std::size_t>(r)] = coin ? 1 : 0;
    ++pending_.beyond_count;
    return coin;
}

std::vector<int> OracleSession::pending_flips(Rng& rng) {
    if (!pending_.valid) throw std::logic_error("pending_flips: no pending sample");
    const Context& ctx = contexts_[static_cast<std::size_t>(pending_.ctx)];
    const int m = static_cast<int>(ctx.ranks.size());
    std::vector<int>& idx = pending_.flipped_idx;

    int i = pending_.decided_upto + 1;
    if (ctx.p >= 1.0) {
        for (; i < m; ++i) idx.push_back(i);
    } else if (ctx.p > 0.0) {
        if (pending_.beyond_count == 0) {
            bulk_coins(ctx, i, rng, idx);
        } else {
            for (; i < m; ++i) {
                const auto r = static_cast<std::size_t>(ctx.ranks[static_cast<std::size_t>(i)]);
                const bool f = (probe_epoch_[r] == pending_epoch_) ? probe_coin_[r] != 0
                                                                   : (uniform01_open(rng) <= ctx.p);
                if (f) idx.push_back(i);
            }
        }
    }
    // stamp everything (idempotent) so later probes agree
    for (int fi : idx)
        flip_epoch_[static_cast<std::size_t>(ctx.ranks[static_cast<std::size_t>(fi)])] = pending_epoch_;
    pending_.decided_upto = m - 1;
    pending_.beyond_count = 0;

    std::vector<int> positions;
    positions.reserve(idx.size());
    for (int k : idx) positions.push_back(instance_.sigma.of(ctx.ranks[static_cast<std::size_t>(k)]));
    return positions;
}

}  // namespace lobb

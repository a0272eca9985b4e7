#include "lobb/verification.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lobb {

namespace {

constexpr double kE = 2.718281828459045;

double log2d(double v) { return std::log2(v); }

int level_threshold(int n) {  // ceil(4 log2(n) / log2 log2(n))
    return static_cast<int>(std::ceil(4.0 * log2d(n) / log2d(log2d(n))));
}

int lemma4_sample_count(int n) {  // ceil(8e log2^{3/2}(n) / log2 log2(n))
    return static_cast<int>(std::ceil(8.0 * kE * std::pow(log2d(n), 1.5) / log2d(log2d(n))));
}

// Distribution of flip_disagreement_independently as an explicit function:
// zero unless out matches base on all agreement positions of (x, y);
// otherwise a product of p / (1-p) factors over the disagreement positions.
double flip_disagreement_prob(const BitString& out, const BitString& base, const BitString& x,
                              const BitString& y, double p) {
    double prob = 1.0;
    for (int pos = 1; pos <= out.size(); ++pos) {
        if (x.bit(pos) == y.bit(pos)) {
            if (out.bit(pos) != base.bit(pos)) return 0.0;
        } else {
            prob *= (out.bit(pos) != base.bit(pos)) ? p : 1.0 - p;
        }
    }
    return prob;
}

BitString bits_from_int(unsigned v, int n) {
    BitString out(n);
    for (int pos = 1; pos <= n; ++pos) out.set_bit(pos, (v >> (pos - 1)) & 1u);
    return out;
}

std::vector<Permutation> all_permutations(int n) {
    std::vector<int> m(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = j + 1;
    std::vector<Permutation> out;
    do out.emplace_back(m);
    while (std::next_permutation(m.begin(), m.end()));
    return out;
}

}  // namespace

std::string report_to_json_line(const CheckReport& report) {
    nlohmann::json j;
    j["check_name"] = report.check_name;
    j["statistic"] = report.statistic;
    j["bound"] = report.bound;
    j["samples"] = report.samples;
    j["passed"] = report.passed;
    j["seed"] = report.seed;
    return j.dump();
}

InstrumentedState make_level_state(int n, int ell, int c, Rng& rng) {
    if (ell < 0 || c < 0 || ell + c > n) throw std::invalid_argument("make_level_state: bad levels");
    InstrumentedState st;
    st.instance = make_instance(n, rng);
    // x = z, y = z flipped beyond rank ell, y' = z flipped beyond rank ell+c:
    // fitness(y) = ell, fitness(y') = ell + c, agreement(x, y) = sigma(1..ell).
    BitString y = st.instance.z;
    for (int r = ell + 1; r <= n; ++r) y.flip(st.instance.sigma.of(r));
    BitString yp = st.instance.z;
    for (int r = ell + c + 1; r <= n; ++r) yp.flip(st.instance.sigma.of(r));
    st.pair = EncodingPair{st.instance.z, std::move(y), ell};
    st.y_prime = std::move(yp);
    for (int pos = 1; pos <= n; ++pos)
        if (st.pair.x.bit(pos) != st.pair.y.bit(pos)) st.non_encoding.push_back(pos);
    return st;
}

CheckReport check_lemma2(int n, int k, int c, std::uint64_t samples, std::uint64_t seed) {
    if (k < 1 || c < 0 || c >= k || k > n) throw std::invalid_argument("check_lemma2: need 0 <= c < k <= n");
    Rng rng(seed);
    const InstrumentedState st = make_level_state(n, 0, c, rng);
    const int level = st.pair.ell + c;

    std::uint64_t improved = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const BitString y2 =
            flip_disagreement_independently(st.y_prime, st.pair.x, st.pair.y, Rational::unit(k), rng);
        if (evaluate(st.instance, y2) > level) ++improved;
    }
    const double freq = static_cast<double>(improved) / static_cast<double>(samples);
    const double floor_prob = 1.0 / (kE * k);
    const double slack = 3.0 * std::sqrt(kE * k) / std::sqrt(static_cast<double>(samples));
    const double bound = floor_prob * (1.0 - slack);
    const double closed_form = std::pow(1.0 - 1.0 / k, c) / k;

    CheckReport r;
    r.check_name = "lemma2";
    r.statistic = freq;
    r.bound = bound;
    r.samples = samples;
    r.passed = freq >= bound;
    r.seed = seed;
    std::ostringstream d;
    d << "n=" << n << " k=" << k << " c=" << c << " closed_form=" << closed_form
      << " floor=" << floor_prob;
    r.detail = d.str();
    return r;
}

CheckReport check_lemma4(int n, int trials, std::uint64_t seed) {
    if (n < 16) throw std::invalid_argument("check_lemma4: n must be >= 16");
    Rng rng(seed);
    const int k = block_length(n);
    const int m = lemma4_sample_count(n);
    const double threshold = 4.0 * log2d(n) / log2d(log2d(n));

    int ok = 0;
    std::vector<int> level_counts(static_cast<std::size_t>(k));
    for (int t = 0; t < trials; ++t) {
        const InstrumentedState st = make_level_state(n, 0, k, rng);
        std::fill(level_counts.begin(), level_counts.end(), 0);
        for (int i = 0; i < m; ++i) {
            const BitString w =
                flip_disagreement_independently(st.y_prime, st.pair.x, st.pair.y, Rational::unit(k), rng);
            const int f = evaluate(st.instance, w);
            const int c = f - st.pair.ell;  // level c+1 collects fitness ell+c
            if (c >= 0 && c < k) ++level_counts[static_cast<std::size_t>(c)];
        }
        const bool all_big = std::all_of(level_counts.begin(), level_counts.end(),
                                         [&](int v) { return v >= threshold; });
        if (all_big) ++ok;
    }
    const double freq = static_cast<double>(ok) / trials;

    CheckReport r;
    r.check_name = "lemma4";
    r.statistic = freq;
    r.bound = 0.9;
    r.samples = static_cast<std::uint64_t>(trials);
    r.passed = freq >= r.bound;
    r.seed = seed;
    std::ostringstream d;
    d << "n=" << n << " k=" << k << " samples_per_trial=" << m << " threshold=" << threshold;
    r.detail = d.str();
    return r;
}

CheckReport check_lemma5(int n, int trials, std::uint64_t seed) {
    if (n < 16) throw std::invalid_argument("check_lemma5: n must be >= 16");
    Rng rng(seed);
    const int k = block_length(n);
    const int t_size = level_threshold(n);

    int ok = 0;
    for (int t = 0; t < trials; ++t) {
        const InstrumentedState st = make_level_state(n, 0, k, rng);
        bool trial_ok = true;
        for (int c = 1; c <= k && trial_ok; ++c) {
            // Level set of size exactly t_size at fitness ell + c - 1, by
            // rejection sampling; the candidate set keeps positions that
            // every member flipped.
            std::vector<int> cand = st.non_encoding;
            int collected = 0;
            while (collected < t_size) {
                const BitString w = flip_disagreement_independently(st.y_prime, st.pair.x, st.pair.y,
                                                                    Rational::unit(k), rng);
                if (evaluate(st.instance, w) != st.pair.ell + c - 1) continue;
                ++collected;
                std::vector<int> kept;
                kept.reserve(cand.size());
                for (int pos : cand)
                    if (w.bit(pos) != st.y_prime.bit(pos)) kept.push_back(pos);
                cand = std::move(kept);
            }
            const int target_pos = st.instance.sigma.of(st.pair.ell + c);
            trial_ok = (cand.size() == 1 && cand[0] == target_pos);
        }
        if (trial_ok) ++ok;
    }
    const double freq = static_cast<double>(ok) / trials;

    CheckReport r;
    r.check_name = "lemma5";
    r.statistic = freq;
    r.bound = 0.9;
    r.samples = static_cast<std::uint64_t>(trials);
    r.passed = freq >= r.bound;
    r.seed = seed;
    std::ostringstream d;
    d << "n=" << n << " k=" << k << " set_size=" << t_size;
    r.detail = d.str();
    return r;
}

CheckReport check_unbiasedness(int n, std::uint64_t seed) {
    if (n < 1 || n > 6) throw std::invalid_argument("check_unbiasedness: n must be in [1..6]");
    Rng rng(seed);
    const unsigned space = 1u << n;
    const std::vector<Permutation> perms = all_permutations(n);
    const std::vector<double> ps = {0.5, 1.0 / 3.0};
    const double tol = 1e-12;

    // Argument tuples (base, x, y): everything for n <= 3, 50 sampled beyond.
    std::vector<std::array<unsigned, 3>> tuples;
    if (n <= 3) {
        for (unsigned b = 0; b < space; ++b)
            for (unsigned x = 0; x < space; ++x)
                for (unsigned y = 0; y < space; ++y) tuples.push_back({b, x, y});
    } else {
        std::uniform_int_distribution<unsigned> d(0, space - 1);
        for (int i = 0; i < 50; ++i) tuples.push_back({d(rng), d(rng), d(rng)});
    }

    double max_discrepancy = 0.0;
    std::uint64_t checked = 0;

    // Distribution of an operator given encoded arguments, as a dense table.
    const auto dist_of = [&](const std::array<unsigned, 3>& args, int op, double p) {
        std::vector<double> d(space, 0.0);
        const BitString base = bits_from_int(args[0], n);
        const BitString x = bits_from_int(args[1], n);
        const BitString y = bits_from_int(args[2], n);
        if (op == 0) {  // flip_disagreement_independently
            for (unsigned o = 0; o < space; ++o)
                d[o] = flip_disagreement_prob(bits_from_int(o, n), base, x, y, p);
        } else if (op == 1) {  // complement (unary: ignores x, y)
            BitString out = complement(base);
            unsigned v = 0;
            for (int pos = 1; pos <= n; ++pos) v |= static_cast<unsigned>(out.bit(pos)) << (pos - 1);
            d[v] = 1.0;
        } else {  // flip_where_equal / flip_where_all_equal (deterministic)
            BitString out = (op == 2) ? flip_where_equal(base, x, y) : flip_where_all_equal(base, x, y);
            unsigned v = 0;
            for (int pos = 1; pos <= n; ++pos) v |= static_cast<unsigned>(out.bit(pos)) << (pos - 1);
            d[v] = 1.0;
        }
        return d;
    };

    const auto apply_perm_int = [&](const Permutation& sg, unsigned v) {
        unsigned out = 0;
        for (int j = 1; j <= n; ++j)
            if ((v >> (sg.of(j) - 1)) & 1u) out |= 1u << (j - 1);
        return out;
    };

    for (const auto& tup : tuples) {
        for (int op = 0; op < 4; ++op) {
            for (double p : (op == 0 ? ps : std::vector<double>{0.5})) {
                const std::vector<double> d0 = dist_of(tup, op, p);
                // xor invariance against every shift
                for (unsigned shift = 0; shift < space; ++shift) {
                    const std::array<unsigned, 3> shifted = {tup[0] ^ shift, tup[1] ^ shift, tup[2] ^ shift};
                    const std::vector<double> d1 = dist_of(shifted, op, p);
                    for (unsigned o = 0; o < space; ++o)
                        max_discrepancy = std::max(max_discrepancy, std::abs(d0[o] - d1[o ^ shift]));
                }
                // permutation invariance against every sigma
                for (const Permutation& sg : perms) {
                    const std::array<unsigned, 3> permuted = {apply_perm_int(sg, tup[0]),
                                                              apply_perm_int(sg, tup[1]),
                                                              apply_perm_int(sg, tup[2])};
                    const std::vector<double> d1 = dist_of(permuted, op, p);
                    for (unsigned o = 0; o < space; ++o)
                        max_discrepancy = std::max(max_discrepancy, std::abs(d0[o] - d1[apply_perm_int(sg, o)]));
                }
                ++checked;
            }
        }
    }

    // The raw-position probe must be caught: flip_positions({1}) is a point
    // mass that moves with position 1, so some permutation breaks it.
    bool probe_flagged = false;
    if (n >= 2) {
        for (const Permutation& sg : perms) {
            for (unsigned xv = 0; xv < space && !probe_flagged; ++xv) {
                const int one[1] = {1};
                const BitString lhs = flip_positions(bits_from_int(apply_perm_int(sg, xv), n), one);
                const BitString rhs = flip_positions(bits_from_int(xv, n), one);
                unsigned lv = 0, rv = 0;
                for (int pos = 1; pos <= n; ++pos) {
                    lv |= static_cast<unsigned>(lhs.bit(pos)) << (pos - 1);
                    rv |= static_cast<unsigned>(rhs.bit(pos)) << (pos - 1);
                }
                if (lv != apply_perm_int(sg, rv)) probe_flagged = true;
            }
            if (probe_flagged) break;
        }
    } else {
        probe_flagged = true;  // n=1 has only the identity; nothing to flag
    }

    CheckReport r;
    r.check_name = "unbiasedness";
    r.statistic = max_discrepancy;
    r.bound = tol;
    r.samples = checked;
    r.passed = (max_discrepancy <= tol) && probe_flagged;
    r.seed = seed;
    std::ostringstream d;
    d << "n=" << n << " tuples=" << tuples.size() << " probe_flagged=" << (probe_flagged ? 1 : 0);
    r.detail = d.str();
    return r;
}

}  // namespace lobb

#pragma once

// Variation operators used by the optimizers, each tagged with its arity
// (the number of bit strings it consumes). All of them except flip_positions
// are unbiased: their output distribution is invariant under xor shifts of
// all arguments and under position permutations.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lobb/bitstring.hpp"
#include "lobb/rng.hpp"

namespace lobb {

// Flip probabilities are carried as exact unit fractions 1/k so that
// exact-distribution tests never see floating-point drift; sampling uses the
// real value.
struct Rational {
    long long num = 0;
    long long den = 1;
    static Rational unit(long long k) { return {1, k}; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct OperatorDescriptor {
    std::string name;
    int arity = 0;       // number of BitString arguments consumed
    bool unbiased = false;
    std::vector<std::string> parameters;
};

// Catalog of every operator in this module; the static audit checks each
// entry's arity against the actual signature.
const std::vector<OperatorDescriptor>& operator_catalog();
const OperatorDescriptor& descriptor(const std::string& name);

// Trace of variation events, for arity audits of recorded runs.
struct VariationEvent {
    std::string name;
    int arity = 0;
    bool unbiased = false;
};

class VariationTrace {
public:
    void record(const OperatorDescriptor& d) { events_.push_back({d.name, d.arity, d.unbiased}); }
    const std::vector<VariationEvent>& events() const { return events_; }
    int max_arity() const;
    std::size_t count(const std::string& name) const;
    bool has_biased_event() const;

private:
    std::vector<VariationEvent> events_;
};

// ---- operators ----

// Arity 0: uniform over {0,1}^n.
BitString uniform_sample(int n, Rng& rng, VariationTrace* trace = nullptr);

// Arity 1, deterministic: output_i = 1 - x_i.
BitString complement(const BitString& x, VariationTrace* trace = nullptr);

// Arity 3: copies base where x and y agree; where they disagree, flips each
// position independently with probability p.
BitString flip_disagreement_independently(const BitString& base, const BitString& x,
                                          const BitString& y, Rational p, Rng& rng,
                                          VariationTrace* trace = nullptr);

// Arity 3, deterministic: flips w exactly where a_i = b_i.
BitString flip_where_equal(const BitString& w, const BitString& a, const BitString& b,
                           VariationTrace* trace = nullptr);

// Arity 3, deterministic: flips a exactly where a_i = b_i = c_i (the
// candidate-retirement rule of the 3-ary optimizer's trackers).
BitString flip_where_all_equal(const BitString& a, const BitString& b, const BitString& c,
                               VariationTrace* trace = nullptr);

// Positions where x and y coincide, ascending, 1-indexed.
std::vector<int> agreement_set(const BitString& x, const BitString& y);

// x xor e_I for a set of positions I. NOT an unbiased operator: it names raw
// positions, so it fails permutation invariance; the audit flags any use of
// it by the 3-ary algorithms.
BitString flip_positions(const BitString& x, std::span<const int> positions,
                         VariationTrace* trace = nullptr);

// Sampling core shared by every randomized operator: keeps each of
// `positions` independently with probability p (geometric skips, O(result)).
// Returns a subsequence of `positions` in their original order.
std::vector<int> sample_flip_subset(std::span<const int> positions, double p, Rng& rng);

}  // namespace lobb

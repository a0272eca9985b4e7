#include "lobb/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <type_traits>

namespace lobb {

namespace {

const OperatorDescriptor kUniformSample{"uniform_sample", 0, true, {}};
const OperatorDescriptor kComplement{"complement", 1, true, {}};
const OperatorDescriptor kFlipDisagreement{"flip_disagreement_independently", 3, true, {"p"}};
const OperatorDescriptor kFlipWhereEqual{"flip_where_equal", 3, true, {}};
const OperatorDescriptor kFlipWhereAllEqual{"flip_where_all_equal", 3, true, {}};
const OperatorDescriptor kFlipPositions{"flip_positions", 1, false, {"positions"}};

void check_same_length(const BitString& a, const BitString& b, const char* who) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
}

// Number of BitString parameters in a function signature; the operator
// catalog's arities are asserted against this below.
template <typename R, typename... Args>
constexpr int bitstring_params(R (*)(Args...)) {
    return (0 + ... + (std::is_same_v<std::remove_cvref_t<Args>, BitString> ? 1 : 0));
}

static_assert(bitstring_params(&uniform_sample) == 0);
static_assert(bitstring_params(&complement) == 1);
static_assert(bitstring_params(&flip_disagreement_independently) == 3);
static_assert(bitstring_params(&flip_where_equal) == 3);
static_assert(bitstring_params(&flip_where_all_equal) == 3);
static_assert(bitstring_params(&flip_positions) == 1);

}  // namespace

const std::vector<OperatorDescriptor>& operator_catalog() {
    static const std::vector<OperatorDescriptor> catalog = {
        kUniformSample, kComplement, kFlipDisagreement, kFlipWhereEqual, kFlipWhereAllEqual, kFlipPositions};
    return catalog;
}

const OperatorDescriptor& descriptor(const std::string& name) {
    for (const auto& d : operator_catalog())
        if (d.name == name) return d;
    throw std::invalid_argument("unknown operator: " + name);
}

int VariationTrace::max_arity() const {
    int m = 0;
    for (const auto& e : events_) m = std::max(m, e.arity);
    return m;
}

std::size_t VariationTrace::count(const std::string& name) const {
    std::size_t c = 0;
    for (const auto& e : events_)
        if (e.name == name) ++c;
    return c;
}

bool VariationTrace::has_biased_event() const {
    for (const auto& e : events_)
        if (!e.unbiased) return true;
    return false;
}

BitString uniform_sample(int n, Rng& rng, VariationTrace* trace) {
    if (trace) trace->record(kUniformSample);
    BitString out(n);
    std::bernoulli_distribution coin(0.5);
    for (int pos = 1; pos <= n; ++pos) out.set_bit(pos, coin(rng));
    return out;
}

BitString complement(const BitString& x, VariationTrace* trace) {
    if (trace) trace->record(kComplement);
    BitString out = x;
    for (int pos = 1; pos <= out.size(); ++pos) out.flip(pos);
    return out;
}

std::vector<int> sample_flip_subset(std::span<const int> positions, double p, Rng& rng) {
    std::vector<int> out;
    if (p <= 0.0 || positions.empty()) return out;
    const int m = static_cast<int>(positions.size());
    if (p >= 1.0) {
        out.assign(positions.begin(), positions.end());
        return out;
    }
    std::geometric_distribution<int> skip(p);
    int i = 0;
    while (i < m) {
        const int jump = skip(rng);
        if (jump >= m - i) break;
        i += jump;
        out.push_back(positions[static_cast<std::size_t>(i)]);
        ++i;
    }
    return out;
}

BitString flip_disagreement_independently(const BitString& base, const BitString& x,
                                          const BitString& y, Rational p, Rng& rng,
                                          VariationTrace* trace) {
    check_same_length(base, x, "flip_disagreement_independently");
    check_same_length(base, y, "flip_disagreement_independently");
    const double pv = p.value();
    if (pv < 0.0 || pv > 1.0) throw std::invalid_argument("flip_disagreement_independently: p outside [0,1]");
    if (trace) trace->record(kFlipDisagreement);
    std::vector<int> disagree;
    for (int pos = 1; pos <= base.size(); ++pos)
        if (x.bit(pos) != y.bit(pos)) disagree.push_back(pos);
    BitString out = base;
    for (int pos : sample_flip_subset(disagree, pv, rng)) out.flip(pos);
    return out;
}

BitString flip_where_equal(const BitString& w, const BitString& a, const BitString& b,
                           VariationTrace* trace) {
    check_same_length(w, a, "flip_where_equal");
    check_same_length(w, b, "flip_where_equal");
    if (trace) trace->record(kFlipWhereEqual);
    BitString out = w;
    for (int pos = 1; pos <= w.size(); ++pos)
        if (a.bit(pos) == b.bit(pos)) out.flip(pos);
    return out;
}

BitString flip_where_all_equal(const BitString& a, const BitString& b, const BitString& c,
                               VariationTrace* trace) {
    check_same_length(a, b, "flip_where_all_equal");
    check_same_length(a, c, "flip_where_all_equal");
    if (trace) trace->record(kFlipWhereAllEqual);
    BitString out = a;
    for (int pos = 1; pos <= a.size(); ++pos)
        if (a.bit(pos) == b.bit(pos) && b.bit(pos) == c.bit(pos)) out.flip(pos);
    return out;
}

std::vector<int> agreement_set(const BitString& x, const BitString& y) {
    check_same_length(x, y, "agreement_set");
    std::vector<int> out;
    for (int pos = 1; pos <= x.size(); ++pos)
        if (x.bit(pos) == y.bit(pos)) out.push_back(pos);
    return out;
}

BitString flip_positions(const BitString& x, std::span<const int> positions, VariationTrace* trace) {
    if (trace) trace->record(kFlipPositions);
    BitString out = x;
    for (int pos : positions) out.flip(pos);  // BitString range-checks
    return out;
}

}  // namespace lobb

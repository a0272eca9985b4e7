#pragma once

// Statistical and exact checks for the concentration and identification
// claims the optimizers rely on, plus the exact unbiasedness checker.
// Instrumented state construction (which peeks at the hidden instance) lives
// here, keeping the algorithms module black-box clean.

#include <cstdint>
#include <string>
#include <vector>

#include "lobb/algorithms.hpp"
#include "lobb/instance.hpp"
#include "lobb/rng.hpp"

namespace lobb {

struct CheckReport {
    std::string check_name;
    double statistic = 0.0;
    double bound = 0.0;
    std::uint64_t samples = 0;
    bool passed = false;
    std::string detail;
    std::uint64_t seed = 0;
};

// JSON line with exactly {check_name, statistic, bound, samples, passed, seed}.
std::string report_to_json_line(const CheckReport& report);

// Test-only construction: an ell-encoding pair for a fresh instance, plus a
// y' at level ell+c, built directly from the hidden (z, sigma).
struct InstrumentedState {
    Instance instance;
    EncodingPair pair;
    BitString y_prime;
    std::vector<int> non_encoding;  // positions, ascending
};

InstrumentedState make_level_state(int n, int ell, int c, Rng& rng);

// Improvement probability of one encoded-EA step from level ell+c with flip
// rate 1/k: empirical frequency over `samples` draws, passing iff it clears
// 1/(e k) minus three standard errors. detail carries the closed form
// (1-1/k)^c / k.
CheckReport check_lemma2(int n, int k, int c, std::uint64_t samples, std::uint64_t seed);

// Level-set sizes: per trial, draw ceil(8e log2^{3/2}(n)/log2log2(n)) samples
// at rate 1/k above a block plateau and require every level c in [k] to
// collect at least 4 log2(n)/log2log2(n) samples; passes iff the trial
// success frequency reaches 0.9.
CheckReport check_lemma4(int n, int trials, std::uint64_t seed);

// Unique identification: per trial, build level sets of size exactly
// ceil(4 log2(n)/log2log2(n)) by rejection sampling and require every
// candidate set to be the singleton {sigma(ell+c)}; passes iff the trial
// success frequency reaches 0.9.
CheckReport check_lemma5(int n, int trials, std::uint64_t seed);

// Exact xor- and permutation-invariance of the unbiased operators: all
// argument tuples for n <= 3, 50 sampled tuples otherwise (n <= 6), checking
// full output distributions analytically to 1e-12. Also confirms that the
// raw-position probe flip_positions({1}) is flagged as biased.
CheckReport check_unbiasedness(int n, std::uint64_t seed);

}  // namespace lobb

#pragma once

// Problem instances: a hidden target string z and a hidden position order
// sigma. The value of a query x is the length of the longest prefix, in
// sigma-order, on which x agrees with z.

#include <string>

#include "lobb/bitstring.hpp"
#include "lobb/rng.hpp"

namespace lobb {

struct Instance {
    int n = 0;
    BitString z;
    Permutation sigma;
};

// z uniform over {0,1}^n, sigma uniform over S_n, independent.
Instance make_instance(int n, Rng& rng);

// Definitional scan: largest i such that x agrees with z on sigma(1..i).
// O(n), exits at the first disagreement. This is the reference evaluator;
// every fast path in OracleSession is tested against it.
int evaluate(const Instance& instance, const BitString& x);

// JSON: {"n": int, "z": "0/1 string, position 1 first", "sigma": [sigma(1),...,sigma(n)]}
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

}  // namespace lobb

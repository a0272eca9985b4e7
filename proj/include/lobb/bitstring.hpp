#pragma once

// Fixed-length bit strings and permutations of [1..n].
//
// Positions and ranks are 1-indexed in every public interface (matching the
// [n] convention used throughout); storage is 0-indexed internally.

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobb/rng.hpp"

namespace lobb {

class BitString {
public:
    BitString() = default;
    explicit BitString(int n, bool value = false)
        : bits_(check_length(n), value ? 1 : 0) {}

    // Parses "0110"; character 0 of the string is position 1.
    static BitString from_string(const std::string& s) {
        BitString out(static_cast<int>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') out.bits_[i] = 1;
            else if (s[i] != '0') throw std::invalid_argument("BitString: expected '0'/'1', got '" + std::string(1, s[i]) + "'");
        }
        return out;
    }

    int size() const { return static_cast<int>(bits_.size()); }

    std::uint8_t bit(int pos) const { return bits_[index(pos)]; }
    void set_bit(int pos, bool value) { bits_[index(pos)] = value ? 1 : 0; }
    void flip(int pos) { bits_[index(pos)] ^= 1; }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) s[i] = '1';
        return s;
    }

    friend bool operator==(const BitString&, const BitString&) = default;

    friend BitString operator^(const BitString& a, const BitString& b) {
        if (a.size() != b.size()) throw std::invalid_argument("BitString xor: length mismatch");
        BitString out = a;
        for (std::size_t i = 0; i < out.bits_.size(); ++i) out.bits_[i] ^= b.bits_[i];
        return out;
    }

private:
    static int check_length(int n) {
        if (n < 1) throw std::invalid_argument("BitString: length must be >= 1");
        return n;
    }
    std::size_t index(int pos) const {
        if (pos < 1 || pos > size()) throw std::out_of_range("BitString: position " + std::to_string(pos) + " outside [1.." + std::to_string(size()) + "]");
        return static_cast<std::size_t>(pos - 1);
    }

    std::vector<std::uint8_t> bits_;
};

// A bijection on [1..n], stored as the sequence sigma(1),...,sigma(n).
class Permutation {
public:
    Permutation() = default;

    explicit Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
        const int n = static_cast<int>(map_.size());
        if (n < 1) throw std::invalid_argument("Permutation: size must be >= 1");
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) + 1, 0);
        for (int v : map_) {
            if (v < 1 || v > n) throw std::invalid_argument("Permutation: value out of range");
            if (seen[static_cast<std::size_t>(v)]) throw std::invalid_argument("Permutation: duplicate value");
            seen[static_cast<std::size_t>(v)] = 1;
        }
    }

    static Permutation identity(int n) {
        std::vector<int> m(static_cast<std::size_t>(n));
        for (int j = 1; j <= n; ++j) m[static_cast<std::size_t>(j - 1)] = j;
        return Permutation(std::move(m));
    }

    // Fisher-Yates; uniform over S_n.
    static Permutation uniform(int n, Rng& rng) {
        std::vector<int> m(static_cast<std::size_t>(n));
        for (int j = 1; j <= n; ++j) m[static_cast<std::size_t>(j - 1)] = j;
        for (int i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<int> d(0, i);
            std::swap(m[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(d(rng))]);
        }
        return Permutation(std::move(m));
    }

    int size() const { return static_cast<int>(map_.size()); }

    // sigma(j) for rank j in [1..n].
    int of(int j) const {
        if (j < 1 || j > size()) throw std::out_of_range("Permutation: rank out of range");
        return map_[static_cast<std::size_t>(j - 1)];
    }

    // sigma(x) = (x_{sigma(1)}, ..., x_{sigma(n)}).
    BitString apply(const BitString& x) const {
        if (x.size() != size()) throw std::invalid_argument("Permutation::apply: length mismatch");
        BitString out(size());
        for (int j = 1; j <= size(); ++j) out.set_bit(j, x.bit(of(j)) != 0);
        return out;
    }

    Permutation inverse() const {
        std::vector<int> inv(map_.size());
        for (int j = 1; j <= size(); ++j) inv[static_cast<std::size_t>(of(j) - 1)] = j;
        return Permutation(std::move(inv));
    }

    const std::vector<int>& mapping() const { return map_; }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<int> map_;
};

}  // namespace lobb

#include "lobb/instance.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace lobb {

Instance make_instance(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("make_instance: n must be >= 1");
    BitString z(n);
    std::bernoulli_distribution coin(0.5);
    for (int pos = 1; pos <= n; ++pos) z.set_bit(pos, coin(rng));
    Permutation sigma = Permutation::uniform(n, rng);
    return Instance{n, std::move(z), std::move(sigma)};
}

int evaluate(const Instance& instance, const BitString& x) {
    if (x.size() != instance.n)
        throw std::invalid_argument("evaluate: query length " + std::to_string(x.size()) +
                                    " != instance dimension " + std::to_string(instance.n));
    int i = 0;
    while (i < instance.n) {
        const int pos = instance.sigma.of(i + 1);
        if (x.bit(pos) != instance.z.bit(pos)) break;
        ++i;
    }
    return i;
}

std::string instance_to_json(const Instance& instance) {
    nlohmann::json j;
    j["n"] = instance.n;
    j["z"] = instance.z.to_string();
    j["sigma"] = instance.sigma.mapping();
    return j.dump();
}

Instance instance_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    if (n < 1) throw std::invalid_argument("instance_from_json: n must be >= 1");
    BitString z = BitString::from_string(j.at("z").get<std::string>());
    if (z.size() != n) throw std::invalid_argument("instance_from_json: z length != n");
    Permutation sigma(j.at("sigma").get<std::vector<int>>());
    if (sigma.size() != n) throw std::invalid_argument("instance_from_json: sigma size != n");
    return Instance{n, std::move(z), std::move(sigma)};
}

}  // namespace lobb

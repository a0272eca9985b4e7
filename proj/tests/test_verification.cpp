#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "lobb/verification.hpp"

using namespace lobb;

TEST_CASE("make_level_state builds a valid pair and level string") {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const InstrumentedState st = make_level_state(32, 7, 3, rng);
        CHECK(evaluate(st.instance, st.pair.x) == 32);
        CHECK(evaluate(st.instance, st.pair.y) == 7);
        CHECK(st.pair.ell == 7);
        CHECK(static_cast<int>(agreement_set(st.pair.x, st.pair.y).size()) == 7);
        CHECK(evaluate(st.instance, st.y_prime) == 10);
        CHECK(st.non_encoding.size() == 25);
    }
    CHECK_THROWS_AS(make_level_state(8, 7, 3, rng), std::invalid_argument);
}

TEST_CASE("lemma2 closed forms and bound arithmetic") {
    // (1 - 1/4)^3 / 4 = 27/256, and 1/(4e) is below both tested levels.
    CHECK(std::pow(0.75, 3) / 4 == doctest::Approx(27.0 / 256).epsilon(1e-12));
    CHECK(1.0 / (4 * std::exp(1.0)) == doctest::Approx(0.091970).epsilon(1e-4));
    CHECK(27.0 / 256 >= 1.0 / (4 * std::exp(1.0)));
    CHECK(0.25 >= 1.0 / (4 * std::exp(1.0)));
}

TEST_CASE("check_lemma2: k=1 improves every time") {
    const CheckReport r = check_lemma2(16, 1, 0, 2000, 11);
    CHECK(r.passed);
    CHECK(r.statistic == 1.0);
}

TEST_CASE("check_lemma2: frequency sits within 3 SE of the closed form") {
    const std::uint64_t samples = 100000;
    struct Case {
        int k, c;
        double closed;
    };
    for (const Case& kc : {Case{4, 0, 0.25}, Case{4, 3, 27.0 / 256}}) {
        const CheckReport r = check_lemma2(256, kc.k, kc.c, samples, 12);
        CHECK(r.passed);
        const double se = std::sqrt(kc.closed * (1 - kc.closed) / static_cast<double>(samples));
        CHECK(std::abs(r.statistic - kc.closed) <= 3 * se);
    }
}

TEST_CASE("check_lemma2 rejects bad levels") {
    CHECK_THROWS_AS(check_lemma2(16, 4, 4, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_lemma2(16, 0, 0, 100, 1), std::invalid_argument);
}

TEST_CASE("check_lemma2 reports are reproducible from the seed") {
    const CheckReport a = check_lemma2(64, 3, 1, 5000, 99);
    const CheckReport b = check_lemma2(64, 3, 1, 5000, 99);
    CHECK(a.statistic == b.statistic);
    CHECK(a.bound == b.bound);
    CHECK(a.passed == b.passed);
    CHECK(a.detail == b.detail);
}

TEST_CASE("lemma4 sample-count arithmetic at n = 2^16") {
    // ceil(8 e log2^{3/2}(n) / log2 log2 n) = ceil(8 e * 64 / 4) = 348
    const double m = 8.0 * std::exp(1.0) * std::pow(16.0, 1.5) / 4.0;
    CHECK(static_cast<int>(std::ceil(m)) == 348);
    // threshold 4 log2(n)/log2 log2 n = 16
    CHECK(4.0 * 16.0 / 4.0 == 16.0);
}

TEST_CASE("lemma5 survival chain at n = 2^16") {
    // (1/sqrt(log n))^{4 log(n)/log log n} = (1/4)^16 = 2^-32 = 1/n^2
    const double survival = std::pow(0.25, 16);
    CHECK(survival == std::pow(2.0, -32));
    CHECK(survival == 1.0 / (65536.0 * 65536.0));
}

TEST_CASE("check_lemma4 and check_lemma5 pass at n = 2^16 (small pilot)") {
    const CheckReport l4 = check_lemma4(1 << 16, 20, 21);
    CHECK(l4.passed);
    CHECK(l4.detail.find("samples_per_trial=348") != std::string::npos);
    const CheckReport l5 = check_lemma5(1 << 16, 20, 22);
    CHECK(l5.passed);
    CHECK(l5.detail.find("set_size=16") != std::string::npos);
}

TEST_CASE("check_unbiasedness: exhaustive for n <= 3, probe flagged") {
    for (int n : {2, 3}) {
        const CheckReport r = check_unbiasedness(n, 31);
        CHECK(r.passed);
        CHECK(r.statistic <= 1e-12);
        CHECK(r.detail.find("probe_flagged=1") != std::string::npos);
    }
}

TEST_CASE("check reports serialize to the documented JSON keys") {
    CheckReport r;
    r.check_name = "lemma2";
    r.statistic = 0.25;
    r.bound = 0.089;
    r.samples = 1000;
    r.passed = true;
    r.seed = 7;
    r.detail = "not serialized";
    const nlohmann::json j = nlohmann::json::parse(report_to_json_line(r));
    CHECK(j.size() == 6);
    CHECK(j.at("check_name") == "lemma2");
    CHECK(j.at("statistic") == 0.25);
    CHECK(j.at("bound") == 0.089);
    CHECK(j.at("samples") == 1000);
    CHECK(j.at("passed") == true);
    CHECK(j.at("seed") == 7);
}

// lobb: query-complexity experiments on the hidden-permutation LeadingOnes
// class.
//
//   lobb run --algorithm three_ary --sizes 1024,4096 --trials 200 --seed 7 --out results.csv
//   lobb verify --check lemma2 --n 256 --seed 7
//   lobb scaling --in results.csv
//
// Exit status is nonzero iff any trial truncated or any check failed.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lobb/harness.hpp"
#include "lobb/verification.hpp"

namespace {

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> sizes;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        sizes.push_back(std::stoi(tok));
        if (sizes.back() < 1) throw CLI::ValidationError("--sizes", "sizes must be >= 1");
    }
    if (sizes.empty()) throw CLI::ValidationError("--sizes", "no sizes given");
    return sizes;
}

int cmd_run(const std::string& algorithm, const std::string& sizes_csv, int trials,
            std::uint64_t seed, const std::string& out_path, const std::string& mode,
            double budget_factor) {
    lobb::ExperimentConfig config;
    config.algorithm = lobb::parse_algorithm(algorithm);
    config.sizes = parse_sizes(sizes_csv);
    if (trials == 0) {  // defaults sized so standard errors stay small
        const bool baseline = config.algorithm == lobb::Algorithm::kOpoEa ||
                              config.algorithm == lobb::Algorithm::kBinarySearch;
        trials = baseline ? 1000 : 200;
    }
    config.trials_per_size = trials;
    config.base_seed = seed;
    config.budget_factor = budget_factor;
    config.partial_output = out_path;
    if (mode == "ranking") {
        if (config.algorithm != lobb::Algorithm::kRanking)
            throw CLI::ValidationError("--mode", "only the ranking algorithm runs in ranking mode");
        config.mode = lobb::OracleMode::kRanking;
    } else if (config.algorithm == lobb::Algorithm::kRanking) {
        config.mode = lobb::OracleMode::kRanking;  // forced by the algorithm
    }

    const std::vector<lobb::TrialRecord> records = lobb::run_experiment(config);
    if (!out_path.empty()) lobb::emit_csv(records, out_path);

    const lobb::ScalingSummary summary = lobb::summarize(records);
    std::cout << "algorithm=" << lobb::algorithm_name(config.algorithm) << " seed=" << seed
              << " budget_factor=" << budget_factor << "\n";
    lobb::print_summary(summary, std::cout);

    std::uint64_t truncations = 0;
    for (const auto& r : records) truncations += r.truncated ? 1 : 0;
    if (truncations > 0) {
        std::cerr << truncations << " trial(s) truncated at the query budget\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const std::string& check, int n, std::uint64_t seed, int k, int c,
               std::uint64_t samples, int trials) {
    lobb::CheckReport report;
    if (check == "lemma2") report = lobb::check_lemma2(n, k, c, samples, seed);
    else if (check == "lemma4") report = lobb::check_lemma4(n, trials, seed);
    else if (check == "lemma5") report = lobb::check_lemma5(n, trials, seed);
    else if (check == "unbiasedness") report = lobb::check_unbiasedness(n, seed);
    else throw CLI::ValidationError("--check", "unknown check: " + check);

    std::cout << lobb::report_to_json_line(report) << "\n";
    std::cerr << report.check_name << ": " << (report.passed ? "PASS" : "FAIL") << " ("
              << report.detail << ")\n";
    return report.passed ? 0 : 1;
}

int cmd_scaling(const std::string& in_path) {
    const std::vector<lobb::TrialRecord> records = lobb::parse_csv(in_path);
    const lobb::ScalingSummary summary = lobb::summarize(records);
    lobb::print_summary(summary, std::cout);
    std::uint64_t truncations = 0;
    for (const auto& r : records) truncations += r.truncated ? 1 : 0;
    if (truncations > 0) {
        std::cerr << truncations << " truncated trial(s) in " << in_path << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-complexity experiments on hidden-permutation LeadingOnes"};
    app.require_subcommand(1);

    // run
    std::string algorithm;
    std::string sizes_csv;
    int trials = 0;  // 0 = per-algorithm default (1000 baselines, 200 optimizers)
    std::uint64_t seed = 1;
    std::string out_path;
    std::string mode = "value";
    double budget_factor = 50.0;
    CLI::App* run = app.add_subcommand("run", "run trials and emit CSV");
    run->add_option("--algorithm", algorithm, "opo_ea|binary_search|star_ary|three_ary|ranking")->required();
    run->add_option("--sizes", sizes_csv, "comma-separated dimensions, e.g. 1024,4096")->required();
    run->add_option("--trials", trials, "trials per size (default: 1000 for baselines, 200 for optimizers)")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--seed", seed, "base seed");
    run->add_option("--out", out_path, "CSV output path");
    run->add_option("--mode", mode, "value|ranking (ranking is forced for the ranking algorithm)")
        ->check(CLI::IsMember({"value", "ranking"}));
    run->add_option("--budget-factor", budget_factor, "query budget = factor * n * log2 n")
        ->check(CLI::PositiveNumber);

    // verify
    std::string check;
    int vn = 256;
    std::uint64_t vseed = 1;
    int vk = 4, vc = 0;
    std::uint64_t vsamples = 100000;
    int vtrials = 100;
    CLI::App* verify = app.add_subcommand("verify", "run a statistical or exact check");
    verify->add_option("--check", check, "lemma2|lemma4|lemma5|unbiasedness")->required();
    verify->add_option("--n", vn, "dimension");
    verify->add_option("--seed", vseed, "seed");
    verify->add_option("--k", vk, "block length (lemma2)");
    verify->add_option("--c", vc, "level offset (lemma2)");
    verify->add_option("--samples", vsamples, "samples (lemma2)");
    verify->add_option("--trials", vtrials, "trials (lemma4/lemma5)");

    // scaling
    std::string in_path;
    CLI::App* scaling = app.add_subcommand("scaling", "recompute a scaling summary from CSV");
    scaling->add_option("--in", in_path, "CSV produced by `run`")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(algorithm, sizes_csv, trials, seed, out_path, mode, budget_factor);
        if (verify->parsed()) return cmd_verify(check, vn, vseed, vk, vc, vsamples, vtrials);
        if (scaling->parsed()) return cmd_scaling(in_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

#pragma once

// Experiment harness: batches trials across algorithms and sizes, aggregates
// statistics, compares against candidate scaling laws, persists CSV.
//
// A full experiment is a pure function of its config: each trial's seed is a
// fixed mix of (base_seed, algorithm, n, trial_index), so adding sizes or
// algorithms never perturbs existing trials' streams.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lobb/algorithms.hpp"
#include "lobb/oracle.hpp"

namespace lobb {

enum class Algorithm { kOpoEa, kBinarySearch, kStarAry, kThreeAry, kRanking };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::kOpoEa;
    std::vector<int> sizes;
    int trials_per_size = 1;
    std::uint64_t base_seed = 1;
    OracleMode mode = OracleMode::kValue;  // kRanking forced for the ranking algorithm
    double budget_factor = 50.0;           // budget = ceil(factor * n * max(1, log2 n))
    std::string partial_output;            // completed trials are flushed here if a run aborts
};

struct TrialRecord {
    Algorithm algorithm = Algorithm::kOpoEa;
    int n = 0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    std::uint64_t queries = 0;
    bool truncated = false;
    double wall_time_ms = 0.0;

    // wall_time_ms is timing noise, not part of the deterministic payload.
    friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
        return a.algorithm == b.algorithm && a.n == b.n && a.trial_index == b.trial_index &&
               a.seed == b.seed && a.queries == b.queries && a.truncated == b.truncated;
    }
};

std::uint64_t trial_seed(std::uint64_t base_seed, Algorithm a, int n, int trial_index);
std::uint64_t query_budget(double budget_factor, int n);

TrialRecord run_trial(const ExperimentConfig& config, int n, int trial_index);
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

struct SizeStats {
    int n = 0;
    int trials = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ci95_half = 0.0;
    int truncations = 0;
};

struct ModelFit {
    std::string model;           // "n^2", "n log n", "n log n / log log n"
    std::vector<double> ratios;  // mean(n) / g(n), aligned with per_size
    double spread = 0.0;         // (max - min) / min over sizes with >= 30 trials
};

struct ScalingSummary {
    std::vector<SizeStats> per_size;
    std::vector<ModelFit> models;
};

ScalingSummary summarize(const std::vector<TrialRecord>& records);
void print_summary(const ScalingSummary& summary, std::ostream& out);

// CSV: header algorithm,n,trial_index,seed,queries,truncated,wall_time_ms;
// one row per record, ordered by (n, trial_index); UTF-8.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> parse_csv(const std::string& path);

}  // namespace lobb

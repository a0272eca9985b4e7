#include "lobb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lobb {

namespace {

std::uint64_t algorithm_id(Algorithm a) {
    switch (a) {
        case Algorithm::kOpoEa: return 1;
        case Algorithm::kBinarySearch: return 2;
        case Algorithm::kStarAry: return 3;
        case Algorithm::kThreeAry: return 4;
        case Algorithm::kRanking: return 5;
    }
    throw std::logic_error("algorithm_id: bad enum");
}

double model_value(const std::string& model, int n) {
    const double nn = n;
    if (model == "n^2") return nn * nn;
    if (n < 4) return std::nan("");  // log2 log2 undefined below 4
    const double l = std::log2(nn);
    if (model == "n log n") return nn * l;
    if (model == "n log n / log log n") return nn * l / std::log2(l);
    throw std::logic_error("model_value: unknown model");
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::kOpoEa: return "opo_ea";
        case Algorithm::kBinarySearch: return "binary_search";
        case Algorithm::kStarAry: return "star_ary";
        case Algorithm::kThreeAry: return "three_ary";
        case Algorithm::kRanking: return "ranking";
    }
    throw std::logic_error("algorithm_name: bad enum");
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "opo_ea") return Algorithm::kOpoEa;
    if (name == "binary_search") return Algorithm::kBinarySearch;
    if (name == "star_ary") return Algorithm::kStarAry;
    if (name == "three_ary") return Algorithm::kThreeAry;
    if (name == "ranking") return Algorithm::kRanking;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::uint64_t trial_seed(std::uint64_t base_seed, Algorithm a, int n, int trial_index) {
    std::uint64_t h = base_seed;
    h = splitmix64(h ^ (0x9E3779B97F4A7C15ULL * (algorithm_id(a) + 1)));
    h = splitmix64(h ^ (0xBF58476D1CE4E5B9ULL * (static_cast<std::uint64_t>(n) + 1)));
    h = splitmix64(h ^ (0x94D049BB133111EBULL * (static_cast<std::uint64_t>(trial_index) + 1)));
    return h;
}

std::uint64_t query_budget(double budget_factor, int n) {
    const double l = std::max(1.0, std::log2(static_cast<double>(n)));
    return static_cast<std::uint64_t>(std::ceil(budget_factor * n * l));
}

TrialRecord run_trial(const ExperimentConfig& config, int n, int trial_index) {
    TrialRecord rec;
    rec.algorithm = config.algorithm;
    rec.n = n;
    rec.trial_index = trial_index;
    rec.seed = trial_seed(config.base_seed, config.algorithm, n, trial_index);

    Rng instance_rng(splitmix64(rec.seed ^ 0x1157A9CEULL));
    Rng algo_rng(splitmix64(rec.seed ^ 0xA160317Dull));
    Instance instance = make_instance(n, instance_rng);

    const OracleMode mode =
        (config.algorithm == Algorithm::kRanking) ? OracleMode::kRanking : OracleMode::kValue;
    OracleSession session(std::move(instance), mode);
    session.set_query_budget(query_budget(config.budget_factor, n));

    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunResult result{};
        switch (config.algorithm) {
            case Algorithm::kOpoEa: result = opo_ea_baseline(session, algo_rng); break;
            case Algorithm::kBinarySearch: result = binary_search_baseline(session, algo_rng); break;
            case Algorithm::kStarAry: result = star_ary_optimizer(session, algo_rng); break;
            case Algorithm::kThreeAry: result = three_ary_optimizer(session, algo_rng); break;
            case Algorithm::kRanking: result = ranking_optimizer(session, algo_rng); break;
        }
        rec.queries = result.queries;
        rec.truncated = false;
        // Algorithms stop querying once the optimum answer is observed.
        if (result.queries != session.query_count())
            throw std::logic_error("query accounting mismatch: " + std::to_string(result.queries) +
                                   " vs " + std::to_string(session.query_count()));
    } catch (const BudgetExhausted&) {
        rec.queries = session.query_count();
        rec.truncated = true;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
    rec.wall_time_ms = std::round(static_cast<double>(us)) / 1000.0;
    return rec;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
    if (config.trials_per_size < 1) throw std::invalid_argument("run_experiment: trials_per_size < 1");
    if (config.sizes.empty()) throw std::invalid_argument("run_experiment: no sizes");
    std::vector<TrialRecord> records;
    records.reserve(config.sizes.size() * static_cast<std::size_t>(config.trials_per_size));
    try {
        for (int n : config.sizes)
            for (int t = 0; t < config.trials_per_size; ++t) records.push_back(run_trial(config, n, t));
    } catch (...) {
        // flush whatever completed before rethrowing
        if (!config.partial_output.empty() && !records.empty()) emit_csv(records, config.partial_output);
        throw;
    }
    std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return a.n != b.n ? a.n < b.n : a.trial_index < b.trial_index;
    });
    return records;
}

ScalingSummary summarize(const std::vector<TrialRecord>& records) {
    ScalingSummary summary;
    std::vector<int> sizes;
    for (const auto& r : records)
        if (std::find(sizes.begin(), sizes.end(), r.n) == sizes.end()) sizes.push_back(r.n);
    std::sort(sizes.begin(), sizes.end());

    for (int n : sizes) {
        SizeStats st;
        st.n = n;
        double sum = 0.0;
        for (const auto& r : records) {
            if (r.n != n) continue;
            ++st.trials;
            sum += static_cast<double>(r.queries);
            if (r.truncated) ++st.truncations;
        }
        st.mean = sum / st.trials;
        double sq = 0.0;
        for (const auto& r : records)
            if (r.n == n) sq += (static_cast<double>(r.queries) - st.mean) * (static_cast<double>(r.queries) - st.mean);
        st.sd = (st.trials > 1) ? std::sqrt(sq / (st.trials - 1)) : 0.0;
        st.ci95_half = (st.trials > 0) ? 1.96 * st.sd / std::sqrt(static_cast<double>(st.trials)) : 0.0;
        summary.per_size.push_back(st);
    }

    for (const char* model_name : {"n^2", "n log n", "n log n / log log n"}) {
        const std::string model = model_name;
        ModelFit fit;
        fit.model = model;
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& st : summary.per_size) {
            const double g = model_value(model, st.n);
            const double ratio = st.mean / g;
            fit.ratios.push_back(ratio);
            if (st.trials >= 30 && std::isfinite(ratio)) {
                if (!any) { lo = hi = ratio; any = true; }
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        fit.spread = any && lo > 0.0 ? (hi - lo) / lo : std::nan("");
        summary.models.push_back(fit);
    }
    return summary;
}

void print_summary(const ScalingSummary& summary, std::ostream& out) {
    out << std::left << std::setw(10) << "n" << std::setw(9) << "trials" << std::setw(16) << "mean"
        << std::setw(14) << "sd" << std::setw(14) << "ci95" << "truncated\n";
    for (const auto& st : summary.per_size) {
        out << std::left << std::setw(10) << st.n << std::setw(9) << st.trials << std::setw(16)
            << std::fixed << std::setprecision(1) << st.mean << std::setw(14) << st.sd
            << std::setw(14) << st.ci95_half << st.truncations << "\n";
    }
    out << "\n" << std::left << std::setw(26) << "model" << std::setw(44) << "mean/g(n) per size"
        << "spread\n";
    for (const auto& fit : summary.models) {
        std::ostringstream ratios;
        ratios << std::setprecision(5);
        for (double r : fit.ratios) ratios << r << " ";
        out << std::left << std::setw(26) << fit.model << std::setw(44) << ratios.str();
        if (std::isnan(fit.spread)) out << "n/a";
        else out << std::fixed << std::setprecision(4) << fit.spread;
        out << "\n";
    }
    out.flush();
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_csv: cannot write " + path);
    f << "algorithm,n,trial_index,seed,queries,truncated,wall_time_ms\n";
    std::vector<TrialRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return a.n != b.n ? a.n < b.n : a.trial_index < b.trial_index;
    });
    for (const auto& r : sorted) {
        f << algorithm_name(r.algorithm) << ',' << r.n << ',' << r.trial_index << ',' << r.seed
          << ',' << r.queries << ',' << (r.truncated ? 1 : 0) << ',' << std::fixed
          << std::setprecision(3) << r.wall_time_ms << "\n";
    }
    if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

std::vector<TrialRecord> parse_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("parse_csv: cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("parse_csv: empty file");
    if (line != "algorithm,n,trial_index,seed,queries,truncated,wall_time_ms")
        throw std::runtime_error("parse_csv: unexpected header: " + line);

    std::vector<TrialRecord> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        TrialRecord r;
        std::getline(ss, field, ',');
        r.algorithm = parse_algorithm(field);
        std::getline(ss, field, ',');
        r.n = std::stoi(field);
        std::getline(ss, field, ',');
        r.trial_index = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.queries = std::stoull(field);
        std::getline(ss, field, ',');
        r.truncated = (field == "1");
        std::getline(ss, field, ',');
        r.wall_time_ms = std::stod(field);
        records.push_back(r);
    }
    return records;
}

}  // namespace lobb

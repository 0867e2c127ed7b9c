#pragma once

#include <atomic>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "lingd/config.hpp"
#include "lingd/direct_ling.hpp"
#include "lingd/io.hpp"
#include "lingd/isa_ling.hpp"
#include "lingd/mbest.hpp"
#include "lingd/metrics.hpp"
#include "lingd/sem.hpp"

namespace lingd {

// Grid runner: seeds x sample sizes, one simulated graph per seed, scored
// against the generated ground truth.
struct BenchSpec {
    SemSpec sem;
    std::vector<Index> sample_sizes = {1000, 10000};
    int seeds = 8;
    enum class Method { isa, regression };
    Method method = Method::isa;
    bool oracle_mb = true;
    double lasso_lambda = -1.0;  // < 0 picks the adaptive default
    bool stable = false;         // apply the stability filter
    enum class TargetRule { random, on_cycle };
    TargetRule target_rule = TargetRule::random;
    DiscoveryConfig discovery;
};

struct BenchRun {
    Index n = 0;
    int seed_index = -1;
    int target = -1;
    double shd = 0.0;
    double weight_distance = 0.0;
    int models = 0;
    bool failed = false;
    std::string error;
};

struct BenchCell {
    Index n = 0;
    double mean_shd = 0.0;
    double stderr_shd = 0.0;
    double mean_weight_distance = 0.0;
    double stderr_weight_distance = 0.0;
    int failures = 0;
    std::vector<BenchRun> runs;
};

struct BenchReport {
    std::vector<BenchCell> cells;
};

namespace detail {

inline int bench_worker_count(std::size_t jobs) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("LING_LOCAL_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) workers = std::min(workers, cap);
    }
    return std::min<int>(workers, static_cast<int>(jobs));
}

inline BenchRun bench_one(const BenchSpec& spec, int seed_index, Index n) {
    BenchRun run;
    run.n = n;
    run.seed_index = seed_index;
    const Rng base(spec.sem.seed);

    SemSpec graph_sem = spec.sem;
    graph_sem.seed = base.child(1).child(static_cast<std::uint64_t>(seed_index)).seed();
    const WeightedDigraph g = random_graph(graph_sem);

    // target choice is a function of the graph stream only, so the same
    // seed index studies the same target across the sample-size sweep
    Rng pick = Rng(graph_sem.seed).child(3);
    IndexList candidates;
    if (spec.target_rule == BenchSpec::TargetRule::on_cycle)
        candidates = vertices_on_cycles(g);
    if (candidates.empty())
        for (int v = 0; v < g.d(); ++v)
            if (!markov_blanket(g, v).empty()) candidates.push_back(v);
    if (candidates.empty()) {
        run.failed = true;
        run.error = "graph has no usable target";
        return run;
    }
    run.target = candidates[static_cast<std::size_t>(
        pick.uniform_int(candidates.size()))];

    const LocalModel truth = local_truth(g, run.target);
    SemSpec data_sem = graph_sem;
    data_sem.seed = base.child(2)
                        .child(static_cast<std::uint64_t>(seed_index))
                        .child(static_cast<std::uint64_t>(n))
                        .seed();

    try {
        const Dataset data = simulate(g, n, data_sem);
        const IndexList blanket =
            spec.oracle_mb
                ? markov_blanket(g, run.target)
                : nodewise_lasso_mb(data, run.target, spec.lasso_lambda);
        if (blanket.empty()) throw Error("estimated blanket is empty");

        DiscoveryConfig cfg = spec.discovery;
        cfg.seed = data_sem.seed;
        std::vector<LocalModel> est;
        if (spec.method == BenchSpec::Method::regression) {
            est.push_back(inverse_direct_lingam(run.target, blanket, data, cfg));
        } else {
            LocalModelClass cls = local_isa_ling(run.target, blanket, data, cfg);
            if (spec.stable) cls = stable_filter(std::move(cls));
            for (const auto& member : cls.members) est.push_back(member.model);
        }
        run.models = static_cast<int>(est.size());
        run.shd = shd_local_class({truth}, est);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : est)
            best = std::min(best, weight_distance(truth, m));
        run.weight_distance = best;
    } catch (const Error& e) {
        run.failed = true;
        run.error = e.what();
        run.models = 0;
        run.shd = shd_local_class({truth}, {});
        run.weight_distance = weight_distance(truth, LocalModel{});
    }
    return run;
}

}  // namespace detail

inline BenchReport run_bench(const BenchSpec& spec) {
    struct Job {
        Index n;
        int seed_index;
    };
    std::vector<Job> jobs;
    for (Index n : spec.sample_sizes)
        for (int s = 0; s < spec.seeds; ++s) jobs.push_back({n, s});

    std::vector<BenchRun> results(jobs.size());
    const int workers = detail::bench_worker_count(jobs.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k)
            results[k] = detail::bench_one(spec, jobs[k].seed_index, jobs[k].n);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < jobs.size();
                     k = next.fetch_add(1))
                    results[k] =
                        detail::bench_one(spec, jobs[k].seed_index, jobs[k].n);
            });
        for (auto& t : pool) t.join();
    }

    BenchReport report;
    for (Index n : spec.sample_sizes) {
        BenchCell cell;
        cell.n = n;
        for (std::size_t k = 0; k < jobs.size(); ++k)
            if (jobs[k].n == n) cell.runs.push_back(results[k]);
        const double count = static_cast<double>(cell.runs.size());
        double shd_sum = 0.0, w_sum = 0.0;
        for (const auto& run : cell.runs) {
            shd_sum += run.shd;
            w_sum += run.weight_distance;
            cell.failures += run.failed ? 1 : 0;
        }
        cell.mean_shd = shd_sum / count;
        cell.mean_weight_distance = w_sum / count;
        double shd_var = 0.0, w_var = 0.0;
        for (const auto& run : cell.runs) {
            shd_var += (run.shd - cell.mean_shd) * (run.shd - cell.mean_shd);
            w_var += (run.weight_distance - cell.mean_weight_distance) *
                     (run.weight_distance - cell.mean_weight_distance);
        }
        if (cell.runs.size() > 1) {
            shd_var /= count - 1.0;
            w_var /= count - 1.0;
        }
        cell.stderr_shd = std::sqrt(shd_var / count);
        cell.stderr_weight_distance = std::sqrt(w_var / count);
        report.cells.push_back(std::move(cell));
    }
    return report;
}

inline BenchSpec bench_spec_from_config(
    const std::map<std::string, std::string>& kv) {
    detail::ConfigReader r{kv};
    BenchSpec spec;
    spec.sem = sem_spec_from_config(kv);
    std::vector<long> sizes =
        r.integers("sample_sizes", {1000, 10000});
    spec.sample_sizes.assign(sizes.begin(), sizes.end());
    spec.seeds = static_cast<int>(r.integer("seeds", spec.seeds));
    const std::string method = r.str("method", "isa");
    if (method == "isa")
        spec.method = BenchSpec::Method::isa;
    else if (method == "regression")
        spec.method = BenchSpec::Method::regression;
    else
        throw Error("config: unknown method '" + method + "'");
    const std::string mb = r.str("mb", "oracle");
    if (mb == "oracle")
        spec.oracle_mb = true;
    else if (mb == "lasso")
        spec.oracle_mb = false;
    else
        throw Error("config: unknown mb rule '" + mb + "'");
    spec.lasso_lambda = r.num("lambda", spec.lasso_lambda);
    spec.stable = r.flag("stable", spec.stable);
    const std::string target = r.str("target", "random");
    if (target == "random")
        spec.target_rule = BenchSpec::TargetRule::random;
    else if (target == "cycle")
        spec.target_rule = BenchSpec::TargetRule::on_cycle;
    else
        throw Error("config: unknown target rule '" + target + "'");
    spec.discovery.alpha = r.num("alpha", spec.discovery.alpha);
    spec.discovery.zero_tol = r.num("zero_tol", spec.discovery.zero_tol);
    spec.discovery.rank_tol = r.num("rank_tol", spec.discovery.rank_tol);
    spec.discovery.bonferroni =
        r.flag("bonferroni", spec.discovery.bonferroni);
    return spec;
}

inline json bench_report_to_json(const BenchReport& report) {
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json runs = json::array();
        for (const auto& run : cell.runs)
            runs.push_back({{"seed_index", run.seed_index},
                            {"target", run.target},
                            {"shd", run.shd},
                            {"weight_distance", run.weight_distance},
                            {"models", run.models},
                            {"failed", run.failed},
                            {"error", run.error}});
        cells.push_back({{"n", cell.n},
                         {"mean_shd", cell.mean_shd},
                         {"stderr_shd", cell.stderr_shd},
                         {"mean_weight_distance", cell.mean_weight_distance},
                         {"stderr_weight_distance", cell.stderr_weight_distance},
                         {"failures", cell.failures},
                         {"runs", runs}});
    }
    return {{"cells", cells}};
}

// One row per run; ready for plotting sample-size curves.
inline std::string bench_report_to_csv(const BenchReport& report) {
    std::string out = "n,seed_index,target,shd,weight_distance,models,failed\n";
    for (const auto& cell : report.cells)
        for (const auto& run : cell.runs) {
            out += std::to_string(cell.n) + "," +
                   std::to_string(run.seed_index) + "," +
                   std::to_string(run.target) + "," +
                   detail::format_double(run.shd) + "," +
                   detail::format_double(run.weight_distance) + "," +
                   std::to_string(run.models) + "," +
                   (run.failed ? "1" : "0") + "\n";
        }
    return out;
}

}  // namespace lingd

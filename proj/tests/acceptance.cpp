// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured quantities; the process exits nonzero if any criterion fails.
// The real-data criterion is skipped with a message when the dataset is not
// installed.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>
#include <vector>

#include "lingd/bench.hpp"
#include "lingd/direct_ling.hpp"
#include "lingd/io.hpp"
#include "lingd/isa.hpp"
#include "lingd/isa_ling.hpp"
#include "lingd/mbest.hpp"
#include "lingd/metrics.hpp"
#include "lingd/sem.hpp"

using namespace lingd;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
    std::printf("%s: criterion %d (%s) — %s [%.1fs]\n",
                pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
    std::printf("SKIP: criterion %d (%s) — %s\n", id, name.c_str(),
                why.c_str());
    std::fflush(stdout);
}

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

WeightedDigraph small_cyclic_graph(Rng& rng, int d) {
    SemSpec spec;
    spec.d = d;
    spec.graph_kind = GraphKind::disjoint_cycle_dcg;
    spec.num_cycles = 1;
    spec.cycle_len_min = 2;
    spec.cycle_len_max = std::min(3, d);
    spec.expected_degree = 2.0;
    spec.seed = rng.next();
    return random_stable_dcg(spec);
}

// Independent enumeration of all equivalent models: every one of the d!
// row permutations of I - B with a nonzero diagonal, rescaled to unit
// diagonal. Deliberately separate from the library implementation.
std::vector<Matrix> brute_force_equivalents(const Matrix& b) {
    const Index d = b.rows();
    const Matrix demix = Matrix::Identity(d, d) - b;
    std::vector<int> perm(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::vector<Matrix> out;
    do {
        bool ok = true;
        for (Index i = 0; i < d; ++i)
            if (std::abs(demix(perm[static_cast<std::size_t>(i)], i)) < 1e-12)
                ok = false;
        if (!ok) continue;
        Matrix bp(d, d);
        for (Index i = 0; i < d; ++i)
            bp.row(i) = -demix.row(perm[static_cast<std::size_t>(i)]) /
                        demix(perm[static_cast<std::size_t>(i)], i);
        bp += Matrix::Identity(d, d);
        bp.diagonal().setZero();
        bool dup = false;
        for (const auto& seen : out)
            if ((seen - bp).cwiseAbs().maxCoeff() < 1e-9) dup = true;
        if (!dup) out.push_back(std::move(bp));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

void criterion_1() {
    Timer timer;
    Rng rng(101);
    int graphs = 0, matched = 0, covariance_ok = 0, diag_ok = 0;
    while (graphs < 200) {
        const int d = 3 + static_cast<int>(rng.uniform_int(2));
        const auto g = small_cyclic_graph(rng, d);
        if (vertices_on_cycles(g).empty()) continue;
        ++graphs;
        const auto expected = brute_force_equivalents(g.B);
        const auto cls = equivalence_class(g);
        bool same = cls.members.size() == expected.size();
        for (const auto& exp : expected) {
            bool found = false;
            for (const auto& member : cls.members)
                if ((member.graph.B - exp).cwiseAbs().maxCoeff() < 1e-9)
                    found = true;
            same = same && found;
        }
        matched += same;

        Vector omega(d);
        for (Index i = 0; i < d; ++i) omega(i) = rng.uniform(0.5, 1.5);
        const Matrix sigma = implied_covariance(g, omega);
        bool cov_same = true, diag_zero = true;
        for (const auto& member : cls.members) {
            const Matrix sigma2 =
                implied_covariance(member.graph, member_omega(member, omega));
            cov_same = cov_same &&
                       (sigma - sigma2).cwiseAbs().maxCoeff() < 1e-8;
            diag_zero = diag_zero &&
                        member.graph.B.diagonal().cwiseAbs().maxCoeff() == 0.0;
        }
        covariance_ok += cov_same;
        diag_ok += diag_zero;
    }
    const double secs = timer.seconds();
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "brute-force match %d/200, covariance %d/200, zero-diag "
                  "%d/200, runtime %.1fs < 30s",
                  matched, covariance_ok, diag_ok, secs);
    report(1, "equivalence-class oracle", matched == 200 &&
               covariance_ok == 200 && diag_ok == 200 && secs < 30.0,
           detail, secs);
}

void criterion_2() {
    Timer timer;
    Rng rng(202);
    int cross_cells = 0, cross_ok = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 4 + static_cast<int>(rng.uniform_int(5));
        WeightedDigraph g;
        if (trial % 2 == 0) {
            SemSpec spec;
            spec.d = d;
            spec.expected_degree = 2.0;
            spec.seed = rng.next();
            g = random_dag(spec);
        } else {
            g = small_cyclic_graph(rng, d);
        }
        SemSpec data_spec;
        data_spec.d = d;
        data_spec.seed = rng.next();
        const auto data = simulate(g, 5000, data_spec);

        IndexList verts(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) verts[static_cast<std::size_t>(i)] = i;
        rng.shuffle(verts);
        const std::size_t size =
            2 + rng.uniform_int(static_cast<std::uint64_t>(
                    std::min(6, d) - 1));
        IndexList S(verts.begin(), verts.begin() + static_cast<long>(size));
        std::sort(S.begin(), S.end());

        const auto rep = verify_isa_characterization(g, S, data.values);
        cross_cells += rep.cross_pairs;
        cross_ok += rep.cross_independent;
    }
    const double secs = timer.seconds();
    const double rate =
        cross_cells > 0 ? static_cast<double>(cross_ok) / cross_cells : 1.0;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "cross-group independence %d/%d = %.3f >= 0.90, runtime "
                  "%.1fs < 300s",
                  cross_ok, cross_cells, rate, secs);
    report(2, "subset demixer characterization", rate >= 0.90 && secs < 300.0,
           detail, secs);
}

BenchSpec acyclic_bench_spec() {
    BenchSpec spec;
    spec.sem.d = 15;
    spec.sem.expected_degree = 3.0;
    spec.sem.seed = 303;
    spec.seeds = 8;
    spec.sample_sizes = {1000, 10000};
    spec.method = BenchSpec::Method::isa;
    spec.oracle_mb = true;
    return spec;
}

void criterion_3() {
    Timer timer;
    const BenchReport report_data = run_bench(acyclic_bench_spec());
    const BenchCell& small = report_data.cells[0];
    const BenchCell& large = report_data.cells[1];
    const double secs = timer.seconds();
    const bool pass = large.mean_shd <= 0.5 &&
                      large.mean_shd <= small.mean_shd &&
                      large.mean_weight_distance <= 0.1 && secs < 600.0;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "mean SHD %.3f@n=10000 (<=0.5, <= %.3f@n=1000), mean "
                  "weight distance %.4f (<=0.1)",
                  large.mean_shd, small.mean_shd,
                  large.mean_weight_distance);
    report(3, "acyclic local discovery trend", pass, detail, secs);
}

void criterion_4() {
    Timer timer;
    BenchSpec spec;
    spec.sem.d = 15;
    spec.sem.graph_kind = GraphKind::disjoint_cycle_dcg;
    spec.sem.expected_degree = 3.0;
    spec.sem.num_cycles = 2;
    spec.sem.seed = 404;
    spec.seeds = 8;
    spec.sample_sizes = {10000};
    spec.method = BenchSpec::Method::isa;
    spec.oracle_mb = true;
    spec.stable = true;
    spec.target_rule = BenchSpec::TargetRule::on_cycle;
    const BenchReport report_data = run_bench(spec);
    const BenchCell& cell = report_data.cells[0];
    int single = 0;
    for (const auto& run : cell.runs)
        if (!run.failed && run.models == 1) ++single;
    const double secs = timer.seconds();
    const bool pass = single == spec.seeds && cell.mean_shd <= 1.0 &&
                      secs < 600.0;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "single stable model %d/%d runs, mean SHD %.3f (<=1)",
                  single, spec.seeds, cell.mean_shd);
    report(4, "cyclic discovery with the stability filter", pass, detail,
           secs);
}

void criterion_5() {
    Timer timer;
    // 0 -> 1 -> 2 with a 3-cycle 2 -> 3 -> 4 -> 2 through the target's child
    WeightedDigraph g(5);
    g.add_edge(0, 1, 0.6);
    g.add_edge(1, 2, 0.7);
    g.add_edge(2, 3, 0.8);
    g.add_edge(3, 4, -0.7);
    g.add_edge(4, 2, 0.6);
    const int target = 1;
    const auto cls_truth = equivalence_class(g);

    std::vector<LocalModel> expected;
    for (const auto& member : cls_truth.members) {
        LocalModel lm = local_truth(member.graph, target);
        bool dup = false;
        for (const auto& e : expected)
            if (e.same_structure(lm) && e.max_weight_gap(lm) < 1e-9) dup = true;
        if (!dup) expected.push_back(std::move(lm));
    }

    SemSpec spec;
    spec.d = 5;
    spec.seed = 505;
    const auto data = simulate(g, 50000, spec);
    DiscoveryConfig cfg;
    cfg.seed = 506;
    bool pass = false;
    std::string note;
    double secs = 0.0;
    try {
        const auto cls = local_isa_ling(target, markov_blanket(g, target),
                                        data, cfg);
        secs = timer.seconds();
        bool all_matched = cls.members.size() == expected.size();
        for (const auto& exp : expected) {
            bool found = false;
            for (const auto& member : cls.members)
                if (member.model.same_structure(exp) &&
                    member.model.max_weight_gap(exp) < 0.1)
                    found = true;
            all_matched = all_matched && found;
        }
        pass = all_matched;
        char detail[256];
        std::snprintf(detail, sizeof(detail),
                      "models %zu == |class| %zu, each matching edges and "
                      "weights within 0.1",
                      cls.members.size(), expected.size());
        note = detail;
    } catch (const Error& e) {
        secs = timer.seconds();
        note = std::string("error: ") + e.what();
    }
    report(5, "equivalent-model enumeration", pass, note, secs);
}

void criterion_6() {
    Timer timer;
    const int seeds = 8;
    int exact = 0, weight_ok = 0, population_exact = 0;
    Rng rng(606);
    for (int s = 0; s < seeds; ++s) {
        SemSpec gs;
        gs.d = 10;
        gs.expected_degree = 2.0;
        gs.seed = rng.next();
        const auto g = random_dag(gs);
        IndexList candidates;
        for (int v = 0; v < gs.d; ++v)
            if (!markov_blanket(g, v).empty()) candidates.push_back(v);
        if (candidates.empty()) {
            ++exact;  // nothing to recover
            ++weight_ok;
            ++population_exact;
            continue;
        }
        const int target = candidates[static_cast<std::size_t>(
            rng.uniform_int(candidates.size()))];
        const IndexList blanket = markov_blanket(g, target);
        const LocalModel truth = local_truth(g, target);

        SemSpec ds = gs;
        ds.seed = rng.next();
        const auto data = simulate(g, 10000, ds);
        DiscoveryConfig cfg;
        cfg.seed = rng.next();
        try {
            const auto model = inverse_direct_lingam(target, blanket, data, cfg);
            if (model.same_structure(truth)) {
                ++exact;
                if (model.max_weight_gap(truth) <= 0.05) ++weight_ok;
            }
        } catch (const Error&) {
        }

        Vector omega(gs.d);
        for (Index i = 0; i < gs.d; ++i) omega(i) = rng.uniform(0.3, 1.5);
        const auto population =
            inverse_direct_lingam_population(g, omega, target, blanket);
        if (population.same_structure(truth) &&
            population.max_weight_gap(truth) < 1e-8)
            ++population_exact;
    }
    const double secs = timer.seconds();
    const bool pass = exact >= static_cast<int>(0.8 * seeds) &&
                      weight_ok == exact && population_exact == seeds;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "exact recovery %d/%d (>=80%%), weights within 0.05 on "
                  "%d/%d exact runs, population-moment exactness %d/%d",
                  exact, seeds, weight_ok, exact, population_exact, seeds);
    report(6, "regression route recovery", pass, detail, secs);
}

void criterion_7() {
    Timer timer;
    auto f1_of = [](const IndexList& est, const IndexList& truth) {
        std::set<int> t(truth.begin(), truth.end());
        int tp = 0;
        for (int v : est)
            if (t.count(v)) ++tp;
        if (truth.empty() && est.empty()) return 1.0;
        if (tp == 0) return 0.0;
        return 2.0 * tp / static_cast<double>(est.size() + truth.size());
    };

    const int seeds = 20;
    double f1_small = 0.0, f1_large = 0.0;
    Rng rng(707);
    for (int s = 0; s < seeds; ++s) {
        SemSpec spec;
        spec.d = 20;
        spec.expected_degree = 3.0;
        spec.seed = rng.next();
        const auto g = random_dag(spec);
        const int target = static_cast<int>(rng.uniform_int(spec.d));
        const IndexList truth = markov_blanket(g, target);
        f1_small +=
            f1_of(nodewise_lasso_mb(simulate(g, 500, spec), target), truth);
        f1_large +=
            f1_of(nodewise_lasso_mb(simulate(g, 5000, spec), target), truth);
    }
    f1_small /= seeds;
    f1_large /= seeds;

    int support_ok = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 3 + static_cast<int>(rng.uniform_int(4));
        WeightedDigraph g;
        if (trial % 2 == 0) {
            SemSpec spec;
            spec.d = d;
            spec.expected_degree = 2.0;
            spec.seed = rng.next();
            g = random_dag(spec);
        } else {
            g = small_cyclic_graph(rng, d);
        }
        Vector omega(d);
        for (Index i = 0; i < d; ++i) omega(i) = rng.uniform(0.5, 1.5);
        const Matrix theta = theta_from_model(g.B, omega);
        const Adjacency moral = moral_graph(g);
        bool same = true;
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                if (i != j && (std::abs(theta(i, j)) > 1e-9) != moral(i, j))
                    same = false;
        support_ok += same;
    }
    const double secs = timer.seconds();
    const bool pass = f1_large >= 0.9 && f1_large >= f1_small &&
                      support_ok == 200;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "mean F1 %.3f@n=5000 (>=0.9, >= %.3f@n=500), precision "
                  "support match %d/200",
                  f1_large, f1_small, support_ok);
    report(7, "blanket estimation", pass, detail, secs);
}

void criterion_8() {
    Timer timer;
    const int seeds = 20;
    int agree = 0;
    Rng rng(808);
    for (int s = 0; s < seeds; ++s) {
        SemSpec gs;
        gs.d = 15;
        gs.expected_degree = 3.0;
        gs.seed = rng.next();
        const auto g = random_dag(gs);
        IndexList candidates;
        for (int v = 0; v < gs.d; ++v)
            if (!markov_blanket(g, v).empty()) candidates.push_back(v);
        if (candidates.empty()) {
            ++agree;
            continue;
        }
        const int target = candidates[static_cast<std::size_t>(
            rng.uniform_int(candidates.size()))];
        const IndexList blanket = markov_blanket(g, target);
        SemSpec ds = gs;
        ds.seed = rng.next();
        const auto data = simulate(g, 10000, ds);
        DiscoveryConfig cfg;
        cfg.seed = rng.next();
        try {
            const auto reg = inverse_direct_lingam(target, blanket, data, cfg);
            const auto cls = local_isa_ling(target, blanket, data, cfg);
            if (cls.members.size() == 1 &&
                reg.same_structure(cls.members[0].model))
                ++agree;
        } catch (const Error&) {
        }
    }
    const double secs = timer.seconds();
    const double rate = static_cast<double>(agree) / seeds;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "identical edge sets in %d/%d runs = %.2f (>=0.90)", agree,
                  seeds, rate);
    report(8, "cross-method agreement", rate >= 0.90, detail, secs);
}

bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0;
}

void criterion_9() {
    const char* cli = std::getenv("LINGD_CLI");
    const char* dir_env = std::getenv("LINGD_SACHS_DIR");
    const std::string dir = dir_env ? dir_env : "tests/data/sachs";
    const std::string csv = dir + "/sachs.csv";
    const std::string truth = dir + "/truth.graph.json";
    if (!cli || !file_exists(csv) || !file_exists(truth)) {
        report_skip(9, "real-data protocol",
                    "external dataset not installed (expected " + csv +
                        " and " + truth + "); set LINGD_SACHS_DIR to run");
        return;
    }
    Timer timer;
    bool pass = true;
    std::string detail;
    for (const std::string target : {"PIP2", "PIP3", "Akt"}) {
        const std::string model_path = "/tmp/lingd_sachs_" + target + ".json";
        const std::string metrics_path =
            "/tmp/lingd_sachs_" + target + ".metrics.json";
        const std::string cmd1 = std::string(cli) + " discover " + csv +
                                 " --target " + target +
                                 " --method regression --mb lasso --out " +
                                 model_path;
        const std::string cmd2 = std::string(cli) + " eval " + truth + " " +
                                 model_path + " --out " + metrics_path;
        if (std::system(cmd1.c_str()) != 0 || std::system(cmd2.c_str()) != 0) {
            pass = false;
            detail += target + ": command failed; ";
            continue;
        }
        const json metrics = read_json_file(metrics_path);
        const double shd = metrics.at("shd_local_best").get<double>();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s: SHD %.1f; ", target.c_str(), shd);
        detail += buf;
        pass = pass && shd <= 2.0;
    }
    report(9, "real-data protocol", pass, detail + "(each <= 2)",
           timer.seconds());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}

// Command-line front end: simulate synthetic models, discover local causal
// structure around a target, benchmark over seed/sample grids, and score
// discovered models against a ground-truth graph.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lingd/bench.hpp"
#include "lingd/dataset.hpp"
#include "lingd/direct_ling.hpp"
#include "lingd/io.hpp"
#include "lingd/isa_ling.hpp"
#include "lingd/mbest.hpp"
#include "lingd/metrics.hpp"
#include "lingd/sem.hpp"

namespace {

using namespace lingd;

constexpr int kExitUsage = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitAlgorithm = 4;
constexpr int kExitIdentifiability = 5;

void print_error(const std::string& kind, const std::string& message) {
    json diag = {{"error", kind}, {"message", message}};
    std::cerr << diag.dump() << "\n";
}

std::string dump(const json& j, int indent) {
    return indent > 0 ? j.dump(indent) : j.dump();
}

struct CommonFlags {
    int json_indent = 0;
    std::string out;
};

void emit(const json& j, const CommonFlags& flags) {
    const std::string text = dump(j, flags.json_indent) + "\n";
    if (flags.out.empty())
        std::cout << text;
    else
        write_text(flags.out, text);
}

int cmd_simulate(const std::string& spec_path, const std::string& out_prefix,
                 long n_override, long seed_override, int json_indent) {
    auto kv = parse_config_file(spec_path);
    SemSpec spec = sem_spec_from_config(kv);
    detail::ConfigReader reader{kv};
    Index n = static_cast<Index>(reader.integer("n", 2000));
    if (n_override >= 0) n = n_override;
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);

    const WeightedDigraph g = random_graph(spec);
    const Dataset data = simulate(g, n, spec);

    const std::string graph_path = out_prefix + ".graph.json";
    const std::string data_path = out_prefix + ".data.csv";
    json gj = graph_to_json(g, data.names);
    gj["seed"] = spec.seed;
    write_text(graph_path, dump(gj, json_indent) + "\n");
    write_csv(data, data_path);

    std::printf("seed=%llu d=%d edges=%lld n=%lld wrote %s %s\n",
                static_cast<unsigned long long>(spec.seed), spec.d,
                static_cast<long long>(g.edge_count()),
                static_cast<long long>(n), graph_path.c_str(),
                data_path.c_str());
    return 0;
}

int cmd_discover(const std::string& data_path, const std::string& target_name,
                 const std::string& method, const std::string& mb_rule,
                 bool stable, double lambda, const DiscoveryConfig& cfg,
                 const CommonFlags& flags) {
    const Dataset data = read_csv_file(data_path);
    const int target = data.column(target_name);

    IndexList blanket;
    if (mb_rule == "lasso") {
        blanket = nodewise_lasso_mb(data, target, lambda);
    } else if (mb_rule.rfind("oracle:", 0) == 0) {
        const auto truth = graph_from_json(read_json_file(mb_rule.substr(7)));
        if (truth.d() != data.d())
            throw Error("oracle graph size does not match the dataset");
        blanket = markov_blanket(truth, target);
    } else {
        throw Error("--mb must be 'lasso' or 'oracle:<graph.json>'");
    }
    if (blanket.empty())
        throw EmptySupport("estimated Markov blanket is empty");

    LocalModelClass cls;
    if (method == "isa") {
        cls = local_isa_ling(target, blanket, data, cfg);
        if (stable) cls = stable_filter(std::move(cls));
    } else if (method == "regression") {
        cls.target = target;
        LocalMember member;
        member.model = inverse_direct_lingam(target, blanket, data, cfg);
        member.stable = true;  // acyclic by assumption
        cls.members.push_back(std::move(member));
    } else {
        throw Error("--method must be 'isa' or 'regression'");
    }

    json out = model_class_to_json(cls, cfg.seed);
    out["target_name"] = target_name;
    json mb = json::array();
    for (int v : blanket) mb.push_back(v);
    out["blanket"] = mb;
    emit(out, flags);
    return 0;
}

int cmd_bench(const std::string& spec_path, const std::string& out_prefix,
              int json_indent) {
    const BenchSpec spec = bench_spec_from_config(parse_config_file(spec_path));
    const BenchReport report = run_bench(spec);
    write_text(out_prefix + ".report.json",
               dump(bench_report_to_json(report), json_indent) + "\n");
    write_text(out_prefix + ".cells.csv", bench_report_to_csv(report));
    for (const auto& cell : report.cells)
        std::printf(
            "n=%lld runs=%zu mean_shd=%.4f (se %.4f) mean_wdist=%.4f (se %.4f) "
            "failures=%d\n",
            static_cast<long long>(cell.n), cell.runs.size(), cell.mean_shd,
            cell.stderr_shd, cell.mean_weight_distance,
            cell.stderr_weight_distance, cell.failures);
    return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& model_path,
             const std::string& target_name, const CommonFlags& flags) {
    std::vector<std::string> names;
    const WeightedDigraph g = graph_from_json(read_json_file(truth_path), &names);
    const LocalModelClass est = model_class_from_json(read_json_file(model_path));

    int target = est.target;
    if (!target_name.empty()) {
        bool named = false;
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == target_name) {
                target = static_cast<int>(i);
                named = true;
            }
        if (!named) {
            try {
                target = std::stoi(target_name);
            } catch (...) {
                throw Error("--target '" + target_name +
                            "' is neither a known name nor an index");
            }
        }
    }
    if (target < 0 || target >= g.d())
        throw Error("eval: target outside the graph");

    const LocalModel truth = local_truth(g, target);
    std::vector<LocalModel> est_models;
    for (const auto& member : est.members) est_models.push_back(member.model);

    json out;
    out["target"] = target;
    out["truth_edges"] = truth.edges.size();
    out["est_models"] = est_models.size();
    out["shd_local_class"] = shd_local_class({truth}, est_models);
    double best_shd = static_cast<double>(shd_local(truth, LocalModel{}));
    double best_w = weight_distance(truth, LocalModel{});
    for (const auto& m : est_models) {
        best_shd = std::min(best_shd, static_cast<double>(shd_local(truth, m)));
        best_w = std::min(best_w, weight_distance(truth, m));
    }
    out["shd_local_best"] = best_shd;
    out["weight_distance_best"] = best_w;
    emit(out, flags);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local causal discovery for linear non-Gaussian models"};
    app.require_subcommand(1);

    CommonFlags flags;
    DiscoveryConfig cfg;

    auto* sim = app.add_subcommand("simulate", "sample a graph and a dataset");
    std::string sim_spec, sim_out = "sim";
    long sim_n = -1, sim_seed = -1;
    sim->add_option("--spec", sim_spec, "key=value generation spec")->required();
    sim->add_option("--out", sim_out, "output path prefix");
    sim->add_option("--n", sim_n, "override the sample count");
    sim->add_option("--seed", sim_seed, "override the seed");
    sim->add_option("--json-indent", flags.json_indent, "pretty-print indent");

    auto* disc = app.add_subcommand(
        "discover", "estimate the local model class around a target");
    std::string disc_data, disc_target, disc_method = "isa", disc_mb = "lasso";
    bool disc_stable = false;
    double disc_lambda = -1.0;
    disc->add_option("data", disc_data, "dataset csv")->required();
    disc->add_option("--target", disc_target, "target column name")->required();
    disc->add_option("--method", disc_method, "isa | regression");
    disc->add_option("--mb", disc_mb, "lasso | oracle:<graph.json>");
    disc->add_flag("--stable", disc_stable, "keep only convergent models");
    disc->add_option("--alpha", cfg.alpha, "independence-test level");
    disc->add_option("--zero-tol", cfg.zero_tol, "entry threshold");
    disc->add_option("--rank-tol", cfg.rank_tol, "admissibility rank tolerance");
    disc->add_option("--lambda", disc_lambda, "lasso penalty (default: adaptive)");
    disc->add_option("--seed", cfg.seed, "demixer seed");
    disc->add_flag("--bonferroni", cfg.bonferroni, "correct pairwise levels");
    disc->add_option("--out", flags.out, "write the model json here");
    disc->add_option("--json-indent", flags.json_indent, "pretty-print indent");

    auto* bench = app.add_subcommand("bench", "run a seeds x sample-sizes grid");
    std::string bench_spec, bench_out = "bench";
    bench->add_option("--spec", bench_spec, "key=value bench spec")->required();
    bench->add_option("--out", bench_out, "output path prefix");
    bench->add_option("--json-indent", flags.json_indent, "pretty-print indent");

    auto* eval = app.add_subcommand("eval", "score a model against a graph");
    std::string eval_truth, eval_model, eval_target;
    eval->add_option("truth", eval_truth, "ground-truth graph json")->required();
    eval->add_option("model", eval_model, "discovered model json")->required();
    eval->add_option("--target", eval_target, "override the scored target");
    eval->add_option("--out", flags.out, "write the metrics json here");
    eval->add_option("--json-indent", flags.json_indent, "pretty-print indent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_spec, sim_out, sim_n, sim_seed,
                                flags.json_indent);
        if (disc->parsed())
            return cmd_discover(disc_data, disc_target, disc_method, disc_mb,
                                disc_stable, disc_lambda, cfg, flags);
        if (bench->parsed()) return cmd_bench(bench_spec, bench_out, flags.json_indent);
        if (eval->parsed())
            return cmd_eval(eval_truth, eval_model, eval_target, flags);
    } catch (const RejectionLimit& e) {
        print_error("RejectionLimit", e.what());
        return kExitSimulation;
    } catch (const EmptySupport& e) {
        print_error("EmptySupport", e.what());
        return kExitIdentifiability;
    } catch (const NoAdmissible& e) {
        print_error("NoAdmissible", e.what());
        return kExitIdentifiability;
    } catch (const AllFiltered& e) {
        print_error("AllFiltered", e.what());
        return kExitIdentifiability;
    } catch (const AssertionViolated& e) {
        print_error("AssertionViolated", e.what());
        return kExitAlgorithm;
    } catch (const NoConvergence& e) {
        print_error("NoConvergence", e.what());
        return kExitAlgorithm;
    } catch (const SingularMatrix& e) {
        print_error("SingularMatrix", e.what());
        return kExitAlgorithm;
    } catch (const DegenerateInput& e) {
        print_error("DegenerateInput", e.what());
        return kExitAlgorithm;
    } catch (const Error& e) {
        print_error("Error", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        print_error("Unexpected", e.what());
        return kExitUsage;
    }
    return 0;
}

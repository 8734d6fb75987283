#include <iostream>

#include <CLI11.hpp>

#include "cchm/app.hpp"

namespace {

void add_config_flags(CLI::App* cmd, cchm::CchmConfig& config, double& timeout_min) {
    cmd->add_option("--alpha", config.alpha, "significance level of the Fisher z tests")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-sepset", config.max_sepset, "largest conditioning set")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--timeout-min", timeout_min, "time limit in minutes (0: none)")->capture_default_str();
    cmd->add_flag("--standardize", config.standardize, "scale columns to zero mean and unit variance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal discovery with latent confounders: hybrid constraint/score search"};
    app.require_subcommand(1);

    cchm::GenerateSpec gen;
    std::string truth_dag, coefficients;
    auto* generate = app.add_subcommand("generate", "simulate benchmark instances");
    generate->add_option("--v", gen.v, "number of variables")->capture_default_str();
    generate->add_option("--d", gen.max_in_degree, "maximum in-degree")->capture_default_str();
    generate->add_option("--n", gen.n, "sample size")->capture_default_str();
    generate->add_option("--latent-rate", gen.latent_rate, "fraction of variables hidden")->capture_default_str();
    generate->add_option("--reps", gen.reps, "number of instances")->capture_default_str();
    generate->add_option("--seed", gen.seed, "base seed")->capture_default_str();
    generate->add_option("--out", gen.out, "output directory")->capture_default_str();
    generate->add_option("--truth-dag", truth_dag, "use this DAG (graph file) instead of a random one")
        ->check(CLI::ExistingFile);
    generate->add_option("--coefficients", coefficients, "from,to,beta file for --truth-dag")
        ->check(CLI::ExistingFile);

    cchm::CchmConfig learn_config;
    double learn_timeout = 240.0;
    std::string dataset;
    std::string learn_out = ".";
    auto* learn = app.add_subcommand("learn", "learn a MAG and PAG from a dataset CSV");
    learn->add_option("dataset", dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
    learn->add_option("--out", learn_out, "output directory")->capture_default_str();
    learn->add_option("--seed", learn_config.seed, "recorded in the report")->capture_default_str();
    add_config_flags(learn, learn_config, learn_timeout);

    std::string learned_path, truth_path, eval_out, meta_path;
    cchm::RunLabels labels;
    bool eval_marks = false;
    auto* evaluate = app.add_subcommand("evaluate", "compare a learned PAG with the truth PAG");
    evaluate->add_option("learned", learned_path, "learned PAG graph file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("truth", truth_path, "truth PAG graph file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out", eval_out, "results CSV to append to (default: stdout)");
    evaluate->add_option("--run-id", labels.run_id, "run identifier");
    evaluate->add_option("--meta", meta_path, "instance metadata to fill the run columns")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--alpha", labels.alpha, "alpha used for the learned graph");
    evaluate->add_flag("--marks", eval_marks, "add mark-level precision and recall");

    cchm::RunSpec bench_spec;
    auto* bench = app.add_subcommand("bench", "generate, learn and evaluate over a grid");
    bench->add_option("--v", bench_spec.v, "variable counts")->delimiter(',')->capture_default_str();
    bench->add_option("--d", bench_spec.d, "maximum in-degrees")->delimiter(',')->capture_default_str();
    bench->add_option("--n", bench_spec.n, "sample sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--latent-rate", bench_spec.latent_rate, "latent rates")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--alpha", bench_spec.alpha, "significance levels")->delimiter(',')->capture_default_str();
    bench->add_option("--reps", bench_spec.reps, "instances per setting")->capture_default_str();
    bench->add_option("--seed", bench_spec.seed, "base seed")->capture_default_str();
    bench->add_option("--timeout-min", bench_spec.timeout_min, "per-run time limit in minutes")
        ->capture_default_str();
    bench->add_option("--max-sepset", bench_spec.max_sepset, "largest conditioning set")->capture_default_str();
    bench->add_option("--out", bench_spec.out, "output directory")->capture_default_str();
    bench->add_flag("--standardize", bench_spec.standardize, "standardize data before learning");
    bench->add_flag("--marks", bench_spec.marks, "add mark-level precision and recall");
    bench->add_flag("--record-time", bench_spec.record_time,
                    "fill wall_seconds (makes the results depend on the machine)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            if (!truth_dag.empty()) gen.truth_dag = truth_dag;
            if (!coefficients.empty()) gen.coefficients = coefficients;
            for (const auto& dir : cchm::cmd_generate(gen)) std::cout << dir.string() << "\n";
            return 0;
        }
        if (learn->parsed()) {
            learn_config.timeout_seconds = learn_timeout * 60.0;
            const cchm::LearnOutcome outcome = cchm::cmd_learn(dataset, learn_config, learn_out);
            if (outcome.status != cchm::RunStatus::Ok) {
                std::cerr << "learn: " << cchm::status_name(outcome.status) << ": " << outcome.message << "\n";
                return outcome.status == cchm::RunStatus::Timeout ? 2 : 1;
            }
            return 0;
        }
        if (evaluate->parsed()) {
            if (!meta_path.empty()) {
                const cchm::Metadata meta = cchm::read_metadata(meta_path);
                auto get = [&](const char* key) {
                    auto it = meta.find(key);
                    return it == meta.end() ? std::string("NA") : it->second;
                };
                labels.v = get("v");
                labels.d = get("max_in_degree");
                labels.n = get("n");
                labels.latent_rate = get("latent_rate");
                labels.seed = get("seed");
            }
            if (labels.run_id.empty()) labels.run_id = learned_path;
            cchm::cmd_evaluate(learned_path, truth_path, labels, eval_marks, eval_out, std::cout);
            return 0;
        }
        if (bench->parsed()) {
            cchm::cmd_bench(bench_spec, &std::cerr);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

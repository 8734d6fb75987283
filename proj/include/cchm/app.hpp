#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cchm/graph.hpp"
#include "cchm/graph_io.hpp"
#include "cchm/metrics.hpp"
#include "cchm/search.hpp"
#include "cchm/simulate.hpp"

namespace cchm {

namespace fs = std::filesystem;

/// One simulated benchmark instance: truth graphs plus the observed sample.
struct Instance {
    MixedGraph dag;
    SemParams params;
    MixedGraph mag;
    MixedGraph pag;
    Dataset data;  // observed columns only
    std::vector<std::string> hidden;
    Metadata meta;
};

/// Random DAG, random parameters, sample, hide latents, project. All draws
/// derive from `seed`.
Instance make_instance(int v, int max_in_degree, long n, double latent_rate, std::uint64_t seed);

/// Same, for a given truth network and coefficients.
Instance make_instance(const MixedGraph& dag, const SemParams& params, long n, double latent_rate,
                       std::uint64_t seed);

/// truth_dag.graph, truth_mag.graph, truth_pag.graph, data.csv, data.meta.
void write_instance(const fs::path& dir, const Instance& inst);

struct GenerateSpec {
    int v = 10;
    int max_in_degree = 3;
    long n = 1000;
    double latent_rate = 0.1;
    int reps = 1;
    std::uint64_t seed = 0;
    fs::path out = ".";
    std::optional<fs::path> truth_dag;
    std::optional<fs::path> coefficients;
};

/// Seed of repetition `rep` (0-based) under a base seed.
std::uint64_t instance_seed(std::uint64_t seed, int rep);

/// Writes instance_01, instance_02, ... under spec.out; returns the directories.
std::vector<fs::path> cmd_generate(const GenerateSpec& spec);

enum class RunStatus { Ok, Timeout, Error };
std::string_view status_name(RunStatus s);

struct LearnOutcome {
    RunStatus status = RunStatus::Ok;
    std::string message;
    std::optional<CchmResult> result;
};

/// Runs the pipeline, mapping timeouts and data errors to a status.
LearnOutcome run_cchm(const Dataset& data, const CchmConfig& config);

/// JSON lines, one object per phase.
std::string format_report(const CchmReport& report, const CchmConfig& config, RunStatus status,
                          const std::string& message);

/// learned_mag.graph, learned_pag.graph, report.jsonl under `out`.
LearnOutcome cmd_learn(const fs::path& dataset, const CchmConfig& config, const fs::path& out);

struct Evaluation {
    ConfusionCounts counts;
    PrecisionRecall pr;
    long shd = 0;
    std::optional<double> bsf;
    int edges_learned = 0;
    int edges_true = 0;
    MarkScores marks;
};

Evaluation evaluate(const MixedGraph& learned_pag, const MixedGraph& truth_pag);

/// Result table: one header, rows of pre-formatted cells.
std::vector<std::string> results_header(bool marks);

struct RunLabels {
    std::string run_id;
    std::string v = "NA", d = "NA", n = "NA", latent_rate = "NA", alpha = "NA", seed = "NA";
};

std::vector<std::string> result_row(const RunLabels& labels, const std::optional<Evaluation>& eval,
                                    std::optional<double> wall_seconds, RunStatus status, bool marks);

std::string csv_line(const std::vector<std::string>& cells);

/// Appends one row to `out` (header written if the file is new or empty);
/// prints to `console` when `out` is empty.
Evaluation cmd_evaluate(const fs::path& learned, const fs::path& truth, const RunLabels& labels, bool marks,
                        const fs::path& out, std::ostream& console);

struct RunSpec {
    std::vector<int> v{10};
    std::vector<int> d{3};
    std::vector<long> n{1000};
    std::vector<double> latent_rate{0.1};
    std::vector<double> alpha{0.01};
    int reps = 1;
    std::uint64_t seed = 0;
    double timeout_min = 240.0;
    int max_sepset = 4;
    bool standardize = false;
    bool marks = false;
    bool record_time = false;
    fs::path out = ".";

    void validate() const;
};

/// Runs the grid, writes out/results.csv and returns its contents. Run rows
/// come in grid order; each setting is followed by its summary row.
std::string cmd_bench(const RunSpec& spec, std::ostream* progress = nullptr);

std::string format_number(double x);

}  // namespace cchm

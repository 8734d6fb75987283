#include "cchm/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cchm/rng.hpp"

namespace cchm {

namespace {

std::string instance_name(int rep, int reps) {
    const int width = static_cast<int>(std::to_string(std::max(reps, 1)).size());
    std::string digits = std::to_string(rep + 1);
    if (static_cast<int>(digits.size()) < std::max(width, 2)) {
        digits.insert(0, std::max(width, 2) - digits.size(), '0');
    }
    return "instance_" + digits;
}

int max_in_degree_of(const MixedGraph& dag) {
    int d = 0;
    for (NodeId v = 0; v < dag.size(); ++v) d = std::max(d, static_cast<int>(dag.parents(v).size()));
    return d;
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k > 0) out += sep;
        out += items[k];
    }
    return out;
}

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::uint64_t instance_seed(std::uint64_t seed, int rep) { return mix_seed(seed, static_cast<std::uint64_t>(rep)); }

Instance make_instance(const MixedGraph& dag, const SemParams& params, long n, double latent_rate,
                       std::uint64_t seed) {
    check_params(dag, params);
    Instance inst;
    inst.dag = dag;
    inst.dag.set_kind(GraphKind::DAG);
    inst.params = params;
    const Dataset full = sample_sem(inst.dag, params, n, mix_seed(seed, 2));
    LatentSplit split = hide_latents(full, latent_rate, mix_seed(seed, 3));
    inst.data = std::move(split.observed);
    inst.hidden = std::move(split.hidden);
    NodeSet latent_ids;
    for (const std::string& h : inst.hidden) latent_ids.push_back(inst.dag.index_of(h));
    inst.mag = latent_project(inst.dag, latent_ids);
    inst.pag = mag_to_pag(inst.mag);
    inst.meta = {
        {"seed", std::to_string(seed)},
        {"v", std::to_string(inst.dag.size())},
        {"max_in_degree", std::to_string(max_in_degree_of(inst.dag))},
        {"n", std::to_string(n)},
        {"latent_rate", format_number(latent_rate)},
        {"latent", join(inst.hidden, ',')},
        {"rng", std::string(Rng::kAlgorithm)},
    };
    return inst;
}

Instance make_instance(int v, int max_in_degree, long n, double latent_rate, std::uint64_t seed) {
    const MixedGraph dag = random_dag(v, max_in_degree, mix_seed(seed, 0));
    const SemParams params = random_params(dag, mix_seed(seed, 1));
    Instance inst = make_instance(dag, params, n, latent_rate, seed);
    inst.meta["max_in_degree"] = std::to_string(max_in_degree);
    return inst;
}

void write_instance(const fs::path& dir, const Instance& inst) {
    fs::create_directories(dir);
    write_graph(dir / "truth_dag.graph", inst.dag);
    write_graph(dir / "truth_mag.graph", inst.mag);
    write_graph(dir / "truth_pag.graph", inst.pag);
    write_dataset(dir / "data.csv", inst.data);
    write_metadata(dir / "data.meta", inst.meta);
}

std::vector<fs::path> cmd_generate(const GenerateSpec& spec) {
    if (spec.reps < 1) throw std::invalid_argument("generate: --reps must be >= 1");
    if (spec.n < 1) throw std::invalid_argument("generate: --n must be >= 1");
    if (spec.coefficients && !spec.truth_dag) throw std::invalid_argument("generate: coefficients need a truth DAG");
    std::optional<MixedGraph> dag;
    std::optional<SemParams> params;
    if (spec.truth_dag) {
        dag = read_graph(*spec.truth_dag, GraphKind::DAG);
        for (auto [i, j] : dag->edges()) {
            if (!dag->is_directed(i, j) && !dag->is_directed(j, i)) {
                throw FormatError("generate: truth DAG has a non-directed edge");
            }
        }
        topological_order(*dag);  // rejects cycles
        if (spec.coefficients) params = read_coefficients(*spec.coefficients, *dag);
    }
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < spec.reps; ++rep) {
        const std::uint64_t seed = instance_seed(spec.seed, rep);
        Instance inst;
        if (dag) {
            const SemParams p = params ? *params : random_params(*dag, mix_seed(seed, 1));
            inst = make_instance(*dag, p, spec.n, spec.latent_rate, seed);
        } else {
            inst = make_instance(spec.v, spec.max_in_degree, spec.n, spec.latent_rate, seed);
        }
        const fs::path dir = spec.out / instance_name(rep, spec.reps);
        write_instance(dir, inst);
        if (dag) write_text(dir / "truth_coefficients.csv", format_coefficients(inst.dag, inst.params));
        dirs.push_back(dir);
    }
    return dirs;
}

std::string_view status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::Error: return "error";
    }
    return "error";
}

LearnOutcome run_cchm(const Dataset& data, const CchmConfig& config) {
    LearnOutcome out;
    try {
        out.result = cchm(data, config);
        if (out.result->report.timed_out) {
            out.status = RunStatus::Timeout;
            out.message = "time limit reached during hill climbing";
        }
    } catch (const TimeoutError& e) {
        out.status = RunStatus::Timeout;
        out.message = e.what();
    } catch (const DegenerateInput& e) {
        out.status = RunStatus::Error;
        out.message = e.what();
    } catch (const SimulationError& e) {
        out.status = RunStatus::Error;
        out.message = e.what();
    }
    return out;
}

std::string format_report(const CchmReport& r, const CchmConfig& config, RunStatus status,
                          const std::string& message) {
    using nlohmann::json;
    std::string out;
    auto emit = [&](const json& j) { out += j.dump() + "\n"; };
    emit({{"phase", "config"},
          {"alpha", config.alpha},
          {"max_sepset", config.max_sepset},
          {"ricf_tol", config.ricf.tol},
          {"ricf_max_iter", config.ricf.max_iter},
          {"score_epsilon", config.score_epsilon},
          {"standardize", config.standardize},
          {"timeout_seconds", config.timeout_seconds},
          {"seed", config.seed}});
    emit({{"phase", "constraints"},
          {"wall_seconds", r.seconds_constraints},
          {"variables", r.variables},
          {"samples", r.samples},
          {"degenerate", r.degenerate},
          {"skeleton_edges", r.skeleton_edges},
          {"whitelist", r.whitelist},
          {"blacklist", r.blacklist},
          {"ambiguous", r.ambiguous}});
    emit({{"phase", "hill_climb"},
          {"wall_seconds", r.seconds_climb},
          {"initial_score", r.initial_score},
          {"score", r.climb_score},
          {"steps", r.climb_steps},
          {"dropped_constraints", r.dropped},
          {"timed_out", r.timed_out},
          {"cached_components", r.cached_components}});
    emit({{"phase", "effects"}, {"wall_seconds", r.seconds_effects}, {"score", r.final_score}, {"flips", r.effect_flips}});
    emit({{"phase", "output"},
          {"status", std::string(status_name(status))},
          {"message", message},
          {"maximality_violations", r.maximality_violations}});
    return out;
}

LearnOutcome cmd_learn(const fs::path& dataset, const CchmConfig& config, const fs::path& out) {
    const Dataset data = read_dataset(dataset);
    fs::create_directories(out);
    LearnOutcome outcome = run_cchm(data, config);
    if (outcome.result) {
        write_graph(out / "learned_mag.graph", outcome.result->mag);
        write_graph(out / "learned_pag.graph", outcome.result->pag);
        write_text(out / "report.jsonl", format_report(outcome.result->report, config, outcome.status, outcome.message));
    } else {
        CchmReport empty;
        empty.variables = data.variables();
        empty.samples = data.samples();
        write_text(out / "report.jsonl", format_report(empty, config, outcome.status, outcome.message));
    }
    return outcome;
}

Evaluation evaluate(const MixedGraph& learned, const MixedGraph& truth) {
    Evaluation e;
    e.counts = confusion(learned, truth);
    e.pr = precision_recall(e.counts);
    e.shd = shd(learned, truth);
    e.bsf = bsf(e.counts);
    e.edges_learned = learned.num_edges();
    e.edges_true = truth.num_edges();
    e.marks = mark_scores(learned, truth);
    return e;
}

std::vector<std::string> results_header(bool marks) {
    std::vector<std::string> h{"run_id",       "v",          "d",      "n",           "latent_rate",
                               "alpha",        "seed",       "precision", "recall",   "shd",
                               "bsf",          "edges_learned", "edges_true", "wall_seconds", "status",
                               "precision_se", "recall_se",  "shd_se", "bsf_se"};
    if (marks) {
        for (const char* c : {"arrow_precision", "arrow_recall", "tail_precision", "tail_recall"}) h.emplace_back(c);
    }
    return h;
}

std::vector<std::string> result_row(const RunLabels& labels, const std::optional<Evaluation>& eval,
                                    std::optional<double> wall_seconds, RunStatus status, bool marks) {
    std::vector<std::string> row{labels.run_id,      labels.v,     labels.d,   labels.n,
                                 labels.latent_rate, labels.alpha, labels.seed};
    if (eval) {
        row.push_back(format_number(eval->pr.precision));
        row.push_back(format_number(eval->pr.recall));
        row.push_back(std::to_string(eval->shd));
        row.push_back(opt_number(eval->bsf));
        row.push_back(std::to_string(eval->edges_learned));
        row.push_back(std::to_string(eval->edges_true));
    } else {
        row.insert(row.end(), 6, "");
    }
    row.push_back(opt_number(wall_seconds));
    row.emplace_back(status_name(status));
    row.insert(row.end(), 4, "");  // standard errors only on summary rows
    if (marks) {
        if (eval) {
            row.push_back(format_number(eval->marks.arrow.precision));
            row.push_back(format_number(eval->marks.arrow.recall));
            row.push_back(format_number(eval->marks.tail.precision));
            row.push_back(format_number(eval->marks.tail.recall));
        } else {
            row.insert(row.end(), 4, "");
        }
    }
    return row;
}

std::string csv_line(const std::vector<std::string>& cells) { return join(cells, ',') + "\n"; }

Evaluation cmd_evaluate(const fs::path& learned, const fs::path& truth, const RunLabels& labels, bool marks,
                        const fs::path& out, std::ostream& console) {
    const MixedGraph l = read_graph(learned, GraphKind::PAG);
    const MixedGraph t = read_graph(truth, GraphKind::PAG);
    const Evaluation e = evaluate(l, t);
    const std::string header = csv_line(results_header(marks));
    const std::string row = csv_line(result_row(labels, e, std::nullopt, RunStatus::Ok, marks));
    if (out.empty()) {
        console << header << row;
        return e;
    }
    std::string existing;
    if (fs::exists(out)) existing = read_text(out);
    if (existing.empty()) {
        existing = header;
    } else if (existing.compare(0, header.size(), header) != 0) {
        throw FormatError("evaluate: " + out.string() + " has a different header");
    }
    write_text(out, existing + row);
    return e;
}

void RunSpec::validate() const {
    if (v.empty() || d.empty() || n.empty() || latent_rate.empty() || alpha.empty()) {
        throw std::invalid_argument("bench: every grid list must be non-empty");
    }
    if (reps < 1) throw std::invalid_argument("bench: --reps must be >= 1");
    for (double a : alpha) {
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("bench: alpha must be in (0, 1)");
    }
    for (double r : latent_rate) {
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("bench: latent rate must be in [0, 1)");
    }
    if (max_sepset < 0) throw std::invalid_argument("bench: --max-sepset must be >= 0");
}

namespace {

struct Accumulator {
    std::vector<double> values;
    void add(std::optional<double> x) {
        if (x) values.push_back(*x);
    }
    std::optional<double> mean() const {
        if (values.empty()) return std::nullopt;
        double s = 0.0;
        for (double x : values) s += x;
        return s / static_cast<double>(values.size());
    }
    std::optional<double> se() const {
        if (values.size() < 2) return std::nullopt;
        const double m = *mean();
        double ss = 0.0;
        for (double x : values) ss += (x - m) * (x - m);
        const double k = static_cast<double>(values.size());
        return std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
};

}  // namespace

std::string cmd_bench(const RunSpec& spec, std::ostream* progress) {
    spec.validate();
    fs::create_directories(spec.out);
    std::string csv = csv_line(results_header(spec.marks));
    std::uint64_t data_setting = 0;
    for (int v : spec.v) {
        for (int d : spec.d) {
            for (long n : spec.n) {
                for (double rate : spec.latent_rate) {
                    // Alpha variants share their instances.
                    const std::uint64_t setting_seed = mix_seed(spec.seed, data_setting++);
                    for (double alpha : spec.alpha) {
                        const std::string setting = "v" + std::to_string(v) + "_d" + std::to_string(d) + "_n" +
                                                    std::to_string(n) + "_r" + format_number(rate) + "_a" +
                                                    format_number(alpha);
                        Accumulator precision, recall, shd_acc, bsf_acc, learned, truth, wall;
                        Accumulator arrow_p, arrow_r, tail_p, tail_r;
                        for (int rep = 0; rep < spec.reps; ++rep) {
                            const std::uint64_t seed = instance_seed(setting_seed, rep);
                            const RunLabels labels{setting + "_rep" + instance_name(rep, spec.reps).substr(9),
                                                   std::to_string(v),    std::to_string(d),
                                                   std::to_string(n),    format_number(rate),
                                                   format_number(alpha), std::to_string(seed)};
                            std::optional<Evaluation> eval;
                            RunStatus status = RunStatus::Ok;
                            const auto start = std::chrono::steady_clock::now();
                            try {
                                const Instance inst = make_instance(v, d, n, rate, seed);
                                CchmConfig config;
                                config.alpha = alpha;
                                config.max_sepset = spec.max_sepset;
                                config.seed = seed;
                                config.standardize = spec.standardize;
                                config.timeout_seconds = spec.timeout_min * 60.0;
                                const LearnOutcome outcome = run_cchm(inst.data, config);
                                status = outcome.status;
                                if (status == RunStatus::Ok) eval = evaluate(outcome.result->pag, inst.pag);
                            } catch (const std::exception& e) {
                                status = RunStatus::Error;
                                if (progress) *progress << labels.run_id << ": " << e.what() << "\n";
                            }
                            const double seconds =
                                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                            const std::optional<double> wall_seconds =
                                spec.record_time ? std::optional<double>(seconds) : std::nullopt;
                            csv += csv_line(result_row(labels, eval, wall_seconds, status, spec.marks));
                            if (progress) {
                                *progress << labels.run_id << " " << status_name(status) << " "
                                          << format_number(seconds) << "s\n";
                            }
                            wall.add(wall_seconds);
                            if (!eval) continue;
                            precision.add(eval->pr.precision);
                            recall.add(eval->pr.recall);
                            shd_acc.add(static_cast<double>(eval->shd));
                            bsf_acc.add(eval->bsf);
                            learned.add(eval->edges_learned);
                            truth.add(eval->edges_true);
                            arrow_p.add(eval->marks.arrow.precision);
                            arrow_r.add(eval->marks.arrow.recall);
                            tail_p.add(eval->marks.tail.precision);
                            tail_r.add(eval->marks.tail.recall);
                        }
                        std::vector<std::string> row{setting + "_mean",
                                                     std::to_string(v),
                                                     std::to_string(d),
                                                     std::to_string(n),
                                                     format_number(rate),
                                                     format_number(alpha),
                                                     "NA",
                                                     opt_number(precision.mean()),
                                                     opt_number(recall.mean()),
                                                     opt_number(shd_acc.mean()),
                                                     opt_number(bsf_acc.mean()),
                                                     opt_number(learned.mean()),
                                                     opt_number(truth.mean()),
                                                     opt_number(wall.mean()),
                                                     "summary:" + std::to_string(precision.values.size()) + "/" +
                                                         std::to_string(spec.reps),
                                                     opt_number(precision.se()),
                                                     opt_number(recall.se()),
                                                     opt_number(shd_acc.se()),
                                                     opt_number(bsf_acc.se())};
                        if (spec.marks) {
                            for (const Accumulator* acc : {&arrow_p, &arrow_r, &tail_p, &tail_r}) {
                                row.push_back(opt_number(acc->mean()));
                            }
                        }
                        csv += csv_line(row);
                    }
                }
            }
        }
    }
    write_text(spec.out / "results.csv", csv);
    return csv;
}

}  // namespace cchm

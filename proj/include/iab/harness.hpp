#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iab/agents.hpp"
#include "iab/greedy.hpp"
#include "iab/plan_io.hpp"

namespace iab {

// Trailing mean over min(window, index + 1) samples.
std::vector<double> moving_average(std::span<const double> series, int window);

struct EvalStats {
    int n_tests = 0;
    int full_coverage_count = 0;
    double mean_nodes_all = 0.0;   // over every evaluation episode
    double mean_nodes_full = 0.0;  // over full-coverage episodes only
    int min_nodes = 0;
    int max_nodes = 0;
    bool best_full_coverage = false;
    std::optional<NetworkState> best;
    std::vector<TraceEntry> best_trace;
};

// Runs n_tests episodes under the trained policy with residual exploration
// epsilon, and keeps the best plan: full coverage with fewest nodes, ties
// broken by larger total donor residual.
EvalStats evaluate_best_of(const Mlp& net, MdpEnv& env, int n_tests, double epsilon, std::uint64_t seed);

// CSV stream of per-episode training metrics; moving average window 500.
std::string metrics_csv(const RunMetrics& metrics);

// FNV-1a over the canonical resolved config; names the output directory.
std::uint64_t config_hash(const nlohmann::json& resolved);

// Writes content, but refuses to replace an existing file whose bytes differ.
void write_file_checked(const std::string& path, const std::string& content);

struct ExperimentOptions {
    std::optional<std::uint64_t> seed;
    std::vector<Variant> variants;       // empty: the config's training.variant
    std::vector<std::string> layouts;    // empty: the config's donors block
    bool desk_scale = false;
    bool include_greedy = false;         // add the baseline to the summary
    std::string out_dir = "runs";
    int jobs = 0;                        // 0: hardware concurrency
    bool quiet = false;
};

struct RunOutput {
    std::string layout;
    std::string algo;  // variant name or "greedy"
    std::string dir;   // per-run output directory (empty for greedy)
    int nodes = 0;     // greedy node count or best-plan node count
    double mean_nodes = 0.0;
    int min_nodes = 0;
    int max_nodes = 0;
    double full_coverage_rate = 0.0;
    bool full_coverage = false;
};

// Trains and evaluates every requested (layout x variant) cell, each in its
// own subdirectory of <out_dir>/<config-hash>-s<seed>/. Emits metrics.csv,
// checkpoint.bin, best_plan.json, trace.jsonl and summary.json per cell, and
// compare.csv at the root when more than one cell ran.
std::vector<RunOutput> run_experiment(const nlohmann::json& base_config, const ExperimentOptions& options);

std::string compare_csv(const std::vector<RunOutput>& rows);

// The root output directory for a given config + options.
std::string experiment_root(const nlohmann::json& base_config, const ExperimentOptions& options);

}  // namespace iab

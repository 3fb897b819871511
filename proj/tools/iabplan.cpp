// Command-line driver for the iabdeploy library. Everything goes through the
// public C API; this translation unit never touches the C++ core directly.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iabdeploy.h"

namespace {

int exit_code_for(iab_status status) {
    switch (status) {
        case IAB_OK: return 0;
        case IAB_ERR_CONFIG: return 2;
        case IAB_ERR_INFEASIBLE: return 3;
        default: return 1;
    }
}

int fail(iab_status status) {
    std::cerr << "error (" << iab_status_name(status) << "): " << iab_last_error() << "\n";
    return exit_code_for(status);
}

struct ScenarioFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string layout;
    bool desk_scale = false;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& flags) {
    cmd->add_option("--config", flags.config, "scenario config file (JSON)")->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--layout", flags.layout, "donor layout: five_dice, vertical or pentagon");
    cmd->add_flag("--desk-scale", flags.desk_scale, "use the small desk-scale preset");
}

std::string scenario_overrides(const ScenarioFlags& flags, const std::string& variant = "") {
    nlohmann::json overrides = nlohmann::json::object();
    if (flags.seed) overrides["seed"] = *flags.seed;
    if (!flags.layout.empty()) overrides["layout"] = flags.layout;
    if (flags.desk_scale) overrides["desk_scale"] = true;
    if (!variant.empty()) overrides["variant"] = variant;
    return overrides.dump();
}

iab_status open_scenario(const ScenarioFlags& flags, const std::string& variant, iab_scenario** out) {
    return iab_scenario_from_file(flags.config.c_str(), scenario_overrides(flags, variant).c_str(), out);
}

int emit_plan(iab_plan* plan, const std::string& out_path) {
    char* text = nullptr;
    const iab_status status = iab_plan_to_json(plan, &text);
    if (status != IAB_OK) {
        iab_plan_free(plan);
        return fail(status);
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        out << text;
        std::cerr << "wrote " << out_path << "\n";
    }
    iab_text_free(text);
    iab_plan_free(plan);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IAB network deployment planner: greedy/oracle baselines and DQN-family agents"};
    app.require_subcommand(1);

    // run: train the configured (or flag-selected) agent and evaluate it.
    auto* run = app.add_subcommand("run", "train an agent and emit metrics, checkpoint and best plan");
    ScenarioFlags run_flags;
    add_scenario_flags(run, run_flags);
    std::string run_variant;
    std::string run_out = "runs";
    int run_jobs = 0;
    bool run_quiet = false;
    run->add_option("--variant", run_variant, "agent: dqn, ddqn, dueling or greedy");
    run->add_option("--out", run_out, "output directory root");
    run->add_option("--jobs", run_jobs, "parallel worker threads");
    run->add_flag("--quiet", run_quiet, "suppress progress lines");

    // evaluate: best-of-N evaluation of a stored checkpoint.
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint with best-of-N tests");
    ScenarioFlags eval_flags;
    add_scenario_flags(evaluate, eval_flags);
    std::string eval_checkpoint;
    int eval_tests = 100;
    evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    evaluate->add_option("--tests", eval_tests, "number of evaluation episodes");

    // compare: greedy + all agents across layouts.
    auto* compare = app.add_subcommand("compare", "compare greedy and all agents across donor layouts");
    ScenarioFlags cmp_flags;
    add_scenario_flags(compare, cmp_flags);
    std::string cmp_out = "runs";
    int cmp_jobs = 0;
    bool cmp_quiet = false;
    std::string cmp_variant;
    compare->add_option("--out", cmp_out, "output directory root");
    compare->add_option("--jobs", cmp_jobs, "parallel worker threads");
    compare->add_option("--variant", cmp_variant, "restrict to one agent");
    compare->add_flag("--quiet", cmp_quiet, "suppress progress lines");

    // greedy / oracle / check-plan.
    auto* greedy = app.add_subcommand("greedy", "compute the greedy baseline plan");
    ScenarioFlags greedy_flags;
    add_scenario_flags(greedy, greedy_flags);
    std::string greedy_out;
    greedy->add_option("--out", greedy_out, "write the plan here instead of stdout");

    auto* oracle = app.add_subcommand("oracle", "exhaustive minimum-node plan for tiny scenarios");
    ScenarioFlags oracle_flags;
    add_scenario_flags(oracle, oracle_flags);
    std::string oracle_out;
    int oracle_max_sites = 12;
    oracle->add_option("--out", oracle_out, "write the plan here instead of stdout");
    oracle->add_option("--max-sites", oracle_max_sites, "refuse scenarios with more candidate sites");

    auto* check = app.add_subcommand("check-plan", "validate a plan document against a scenario");
    ScenarioFlags check_flags;
    add_scenario_flags(check, check_flags);
    std::string check_plan_path;
    check->add_option("--plan", check_plan_path, "plan JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (run_variant == "greedy") {
            iab_scenario* scenario = nullptr;
            const iab_status status = open_scenario(run_flags, "", &scenario);
            if (status != IAB_OK) return fail(status);
            iab_plan* plan = nullptr;
            const iab_status pstatus = iab_greedy_plan(scenario, &plan);
            iab_scenario_free(scenario);
            if (pstatus != IAB_OK) return fail(pstatus);
            return emit_plan(plan, "");
        }
        nlohmann::json options{{"out_dir", run_out}, {"quiet", run_quiet}};
        if (run_flags.seed) options["seed"] = *run_flags.seed;
        if (run_flags.desk_scale) options["desk_scale"] = true;
        if (run_jobs > 0) options["jobs"] = run_jobs;
        if (!run_flags.layout.empty()) options["layouts"] = {run_flags.layout};
        if (!run_variant.empty()) options["variants"] = {run_variant};
        char* csv = nullptr;
        const iab_status status = iab_run_experiment(run_flags.config.c_str(), options.dump().c_str(), &csv);
        if (status != IAB_OK) return fail(status);
        std::cout << csv;
        iab_text_free(csv);
        return 0;
    }

    if (evaluate->parsed()) {
        iab_scenario* scenario = nullptr;
        const iab_status status = open_scenario(eval_flags, "", &scenario);
        if (status != IAB_OK) return fail(status);
        char* summary = nullptr;
        const iab_status estatus =
            iab_evaluate_checkpoint(scenario, eval_checkpoint.c_str(), eval_tests, &summary);
        iab_scenario_free(scenario);
        if (estatus != IAB_OK) return fail(estatus);
        std::cout << summary;
        iab_text_free(summary);
        return 0;
    }

    if (compare->parsed()) {
        nlohmann::json options{{"out_dir", cmp_out}, {"quiet", cmp_quiet}, {"include_greedy", true}};
        if (cmp_flags.seed) options["seed"] = *cmp_flags.seed;
        if (cmp_flags.desk_scale) options["desk_scale"] = true;
        if (cmp_jobs > 0) options["jobs"] = cmp_jobs;
        options["layouts"] = cmp_flags.layout.empty()
                                 ? nlohmann::json::array({"five_dice", "vertical", "pentagon"})
                                 : nlohmann::json::array({cmp_flags.layout});
        options["variants"] = cmp_variant.empty() ? nlohmann::json::array({"dqn", "ddqn", "dueling"})
                                                  : nlohmann::json::array({cmp_variant});
        char* csv = nullptr;
        const iab_status status = iab_run_experiment(cmp_flags.config.c_str(), options.dump().c_str(), &csv);
        if (status != IAB_OK) return fail(status);
        std::cout << csv;
        iab_text_free(csv);
        return 0;
    }

    if (greedy->parsed()) {
        iab_scenario* scenario = nullptr;
        const iab_status status = open_scenario(greedy_flags, "", &scenario);
        if (status != IAB_OK) return fail(status);
        iab_plan* plan = nullptr;
        const iab_status pstatus = iab_greedy_plan(scenario, &plan);
        iab_scenario_free(scenario);
        if (pstatus != IAB_OK) return fail(pstatus);
        return emit_plan(plan, greedy_out);
    }

    if (oracle->parsed()) {
        iab_scenario* scenario = nullptr;
        const iab_status status = open_scenario(oracle_flags, "", &scenario);
        if (status != IAB_OK) return fail(status);
        iab_plan* plan = nullptr;
        const iab_status pstatus = iab_oracle_plan(scenario, oracle_max_sites, &plan);
        iab_scenario_free(scenario);
        if (pstatus != IAB_OK) return fail(pstatus);
        return emit_plan(plan, oracle_out);
    }

    if (check->parsed()) {
        iab_scenario* scenario = nullptr;
        const iab_status status = open_scenario(check_flags, "", &scenario);
        if (status != IAB_OK) return fail(status);
        std::ifstream in(check_plan_path);
        if (!in) {
            iab_scenario_free(scenario);
            std::cerr << "error: cannot open plan file: " << check_plan_path << "\n";
            return 1;
        }
        std::ostringstream text;
        text << in.rdbuf();
        const iab_status cstatus = iab_check_plan(scenario, text.str().c_str());
        iab_scenario_free(scenario);
        if (cstatus == IAB_OK) {
            std::cout << "plan ok\n";
            return 0;
        }
        return fail(cstatus);
    }
    return 0;
}

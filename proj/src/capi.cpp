#include "iabdeploy.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "iab/harness.hpp"
#include "iab/mdp_env.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_text(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Maps exceptions escaping the C++ core onto status codes.
template <class F>
iab_status guarded(F&& f) {
    try {
        return f();
    } catch (const iab::ConfigError& e) {
        set_error(e.what());
        return IAB_ERR_CONFIG;
    } catch (const iab::InfeasibleError& e) {
        set_error(e.what());
        return IAB_ERR_INFEASIBLE;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return IAB_ERR_INVALID_ARG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return IAB_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return IAB_ERR_INTERNAL;
    }
}

nlohmann::json parse_json_arg(const char* text, const char* what) {
    if (text == nullptr) {
        return nlohmann::json::object();
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw iab::ConfigError(std::string(what) + ": " + e.what());
    }
}

void apply_scenario_overrides(nlohmann::json& config, const nlohmann::json& overrides) {
    for (const auto& item : overrides.items()) {
        if (item.key() == "seed") {
            config["seed"] = item.value();
        } else if (item.key() == "layout") {
            config["donors"] = {{"pattern", item.value()}};
        } else if (item.key() == "desk_scale") {
            if (item.value().get<bool>()) {
                iab::apply_desk_scale_preset(config);
            }
        } else if (item.key() == "variant") {
            config["training"]["variant"] = item.value();
        } else {
            throw iab::ConfigError("overrides: unknown key '" + item.key() + "'");
        }
    }
}

}  // namespace

struct iab_scenario {
    iab::Scenario scenario;
};

struct iab_plan {
    nlohmann::json document;
    int nodes = 0;
    double coverage = 0.0;
};

namespace {

iab_plan* make_plan(const iab::NetworkState& state) {
    auto* plan = new iab_plan;
    plan->document = iab::plan_to_json(state);
    plan->nodes = state.node_count();
    plan->coverage = state.coverage_fraction();
    return plan;
}

}  // namespace

extern "C" {

unsigned iab_version(void) { return 10000; }  // 1.0.0

const char* iab_status_name(iab_status status) {
    switch (status) {
        case IAB_OK: return "ok";
        case IAB_ERR_INVALID_ARG: return "invalid_argument";
        case IAB_ERR_CONFIG: return "config_error";
        case IAB_ERR_INFEASIBLE: return "infeasible";
        case IAB_ERR_IO: return "io_error";
        case IAB_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* iab_last_error(void) { return g_last_error.c_str(); }

void iab_text_free(char* text) { delete[] text; }

iab_status iab_scenario_from_json(const char* config_json, const char* overrides_json, iab_scenario** out) {
    return guarded([&]() -> iab_status {
        if (config_json == nullptr || out == nullptr) {
            set_error("config_json and out must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        nlohmann::json config = parse_json_arg(config_json, "config");
        apply_scenario_overrides(config, parse_json_arg(overrides_json, "overrides"));
        *out = new iab_scenario{iab::build_scenario(config)};
        return IAB_OK;
    });
}

iab_status iab_scenario_from_file(const char* path, const char* overrides_json, iab_scenario** out) {
    return guarded([&]() -> iab_status {
        if (path == nullptr || out == nullptr) {
            set_error("path and out must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        std::ifstream in(path);
        if (!in) {
            set_error(std::string("cannot open config file: ") + path);
            return IAB_ERR_IO;
        }
        std::ostringstream text;
        text << in.rdbuf();
        return iab_scenario_from_json(text.str().c_str(), overrides_json, out);
    });
}

void iab_scenario_free(iab_scenario* scenario) { delete scenario; }

int iab_scenario_cell_count(const iab_scenario* s) { return s ? s->scenario.map.cell_count() : -1; }
int iab_scenario_site_count(const iab_scenario* s) { return s ? s->scenario.site_count() : -1; }
int iab_scenario_donor_count(const iab_scenario* s) { return s ? s->scenario.donor_count() : -1; }

iab_status iab_greedy_plan(const iab_scenario* scenario, iab_plan** out) {
    return guarded([&]() -> iab_status {
        if (scenario == nullptr || out == nullptr) {
            set_error("scenario and out must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        *out = make_plan(iab::greedy_plan(scenario->scenario).state);
        return IAB_OK;
    });
}

iab_status iab_oracle_plan(const iab_scenario* scenario, int max_sites, iab_plan** out) {
    return guarded([&]() -> iab_status {
        if (scenario == nullptr || out == nullptr) {
            set_error("scenario and out must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        auto state = iab::brute_force_optimum(scenario->scenario, max_sites);
        if (!state) {
            set_error("no feasible deployment meets the coverage threshold");
            return IAB_ERR_INFEASIBLE;
        }
        *out = make_plan(*state);
        return IAB_OK;
    });
}

int iab_plan_node_count(const iab_plan* plan) { return plan ? plan->nodes : -1; }
double iab_plan_coverage(const iab_plan* plan) { return plan ? plan->coverage : -1.0; }

iab_status iab_plan_to_json(const iab_plan* plan, char** out_json) {
    return guarded([&]() -> iab_status {
        if (plan == nullptr || out_json == nullptr) {
            set_error("plan and out_json must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        *out_json = dup_text(plan->document.dump(2) + "\n");
        return IAB_OK;
    });
}

void iab_plan_free(iab_plan* plan) { delete plan; }

iab_status iab_check_plan(const iab_scenario* scenario, const char* plan_json) {
    return guarded([&]() -> iab_status {
        if (scenario == nullptr || plan_json == nullptr) {
            set_error("scenario and plan_json must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        const nlohmann::json doc = parse_json_arg(plan_json, "plan");
        const iab::PlanCheckResult result = iab::check_plan(scenario->scenario, doc);
        if (!result.ok) {
            std::string msg;
            for (const std::string& v : result.violations) {
                if (!msg.empty()) msg += "; ";
                msg += v;
            }
            set_error(msg);
            return IAB_ERR_INFEASIBLE;
        }
        return IAB_OK;
    });
}

iab_status iab_run_experiment(const char* config_path, const char* options_json, char** out_csv) {
    return guarded([&]() -> iab_status {
        if (config_path == nullptr) {
            set_error("config_path must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        std::ifstream in(config_path);
        if (!in) {
            set_error(std::string("cannot open config file: ") + config_path);
            return IAB_ERR_IO;
        }
        nlohmann::json config;
        try {
            in >> config;
        } catch (const nlohmann::json::exception& e) {
            throw iab::ConfigError(std::string("config parse error: ") + e.what());
        }

        const nlohmann::json opts = parse_json_arg(options_json, "options");
        iab::ExperimentOptions options;
        for (const auto& item : opts.items()) {
            if (item.key() == "seed") {
                options.seed = item.value().get<std::uint64_t>();
            } else if (item.key() == "desk_scale") {
                options.desk_scale = item.value().get<bool>();
            } else if (item.key() == "out_dir") {
                options.out_dir = item.value().get<std::string>();
            } else if (item.key() == "jobs") {
                options.jobs = item.value().get<int>();
            } else if (item.key() == "include_greedy") {
                options.include_greedy = item.value().get<bool>();
            } else if (item.key() == "quiet") {
                options.quiet = item.value().get<bool>();
            } else if (item.key() == "variants") {
                for (const auto& v : item.value()) {
                    options.variants.push_back(iab::variant_from_string(v.get<std::string>()));
                }
            } else if (item.key() == "layouts") {
                for (const auto& l : item.value()) {
                    options.layouts.push_back(l.get<std::string>());
                }
            } else {
                throw iab::ConfigError("options: unknown key '" + item.key() + "'");
            }
        }

        const auto rows = iab::run_experiment(config, options);
        if (out_csv != nullptr) {
            *out_csv = dup_text(iab::compare_csv(rows));
        }
        return IAB_OK;
    });
}

iab_status iab_evaluate_checkpoint(const iab_scenario* scenario, const char* checkpoint_path, int n_tests,
                                   char** out_json) {
    return guarded([&]() -> iab_status {
        if (scenario == nullptr || checkpoint_path == nullptr || out_json == nullptr) {
            set_error("scenario, checkpoint_path and out_json must not be NULL");
            return IAB_ERR_INVALID_ARG;
        }
        const iab::LoadedCheckpoint loaded = iab::load_checkpoint(checkpoint_path);
        iab::MdpEnv env(scenario->scenario);
        if (loaded.net.spec().input_dim != env.input_dim() ||
            loaded.net.spec().output_dim != env.action_count()) {
            set_error("checkpoint does not match the scenario's state/action dimensions");
            return IAB_ERR_INVALID_ARG;
        }
        const iab::Scenario& s = scenario->scenario;
        iab::EvalStats eval =
            iab::evaluate_best_of(loaded.net, env, n_tests, s.training.eval_epsilon, s.training.seed);

        nlohmann::json summary{
            {"n_tests", eval.n_tests},
            {"full_coverage_rate",
             eval.n_tests > 0 ? static_cast<double>(eval.full_coverage_count) / eval.n_tests : 0.0},
            {"mean_nodes", eval.full_coverage_count > 0 ? eval.mean_nodes_full : eval.mean_nodes_all},
            {"min_nodes", eval.min_nodes},
            {"max_nodes", eval.max_nodes}};
        if (eval.best) {
            summary["best_plan"] = iab::plan_to_json(*eval.best);
        }
        *out_json = dup_text(summary.dump(2) + "\n");
        return IAB_OK;
    });
}

}  // extern "C"

/*
 * iabdeploy - C API for the IAB deployment simulator and optimizer.
 *
 * The library plans multi-hop integrated-access-and-backhaul networks on a
 * gridded map: donors feed wirelessly backhauled relay nodes arranged in a
 * forest, subject to per-hop rate budgets and coverage goals. Plans come from
 * a greedy baseline, an exhaustive oracle for tiny instances, or trained
 * DQN-family agents.
 *
 * All functions return iab_status; on failure iab_last_error() carries a
 * human-readable message (thread-local). Objects are opaque handles released
 * with their matching _free function. Strings returned through out-params are
 * heap-allocated; release them with iab_text_free().
 */

#ifndef IABDEPLOY_H
#define IABDEPLOY_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct iab_scenario iab_scenario;
typedef struct iab_plan iab_plan;

typedef enum iab_status {
    IAB_OK = 0,
    IAB_ERR_INVALID_ARG = 1,
    IAB_ERR_CONFIG = 2,     /* malformed or contradictory configuration */
    IAB_ERR_INFEASIBLE = 3, /* the scenario admits no feasible plan */
    IAB_ERR_IO = 4,
    IAB_ERR_INTERNAL = 5
} iab_status;

unsigned iab_version(void);
const char* iab_status_name(iab_status status);
const char* iab_last_error(void);
void iab_text_free(char* text);

/* Scenario construction from a JSON configuration document (see README for
 * the schema). overrides_json may be NULL or a JSON object with any of:
 * {"seed": u64, "layout": "five_dice|vertical|pentagon", "desk_scale": bool,
 *  "variant": "dqn|ddqn|dueling"}. */
iab_status iab_scenario_from_json(const char* config_json, const char* overrides_json, iab_scenario** out);
iab_status iab_scenario_from_file(const char* path, const char* overrides_json, iab_scenario** out);
void iab_scenario_free(iab_scenario* scenario);

int iab_scenario_cell_count(const iab_scenario* scenario);
int iab_scenario_site_count(const iab_scenario* scenario);
int iab_scenario_donor_count(const iab_scenario* scenario);

/* Greedy baseline plan. */
iab_status iab_greedy_plan(const iab_scenario* scenario, iab_plan** out);

/* Exhaustive minimum-node plan for instances with at most max_sites candidate
 * sites; IAB_ERR_INFEASIBLE when no deployment meets the coverage goal. */
iab_status iab_oracle_plan(const iab_scenario* scenario, int max_sites, iab_plan** out);

int iab_plan_node_count(const iab_plan* plan);
double iab_plan_coverage(const iab_plan* plan);
iab_status iab_plan_to_json(const iab_plan* plan, char** out_json);
void iab_plan_free(iab_plan* plan);

/* Independent constraint check of a plan document against a scenario.
 * Returns IAB_OK when the plan is feasible; IAB_ERR_INFEASIBLE lists the
 * violations in iab_last_error(). */
iab_status iab_check_plan(const iab_scenario* scenario, const char* plan_json);

/* Trains and evaluates the configured agents. options_json may be NULL or:
 * {"seed": u64, "desk_scale": bool, "out_dir": str, "jobs": int,
 *  "variants": ["dqn", ...], "layouts": ["five_dice", ...],
 *  "include_greedy": bool, "quiet": bool}
 * Writes metrics/checkpoints/plans under out_dir and returns the comparison
 * table as CSV through out_csv (optional; pass NULL to skip). */
iab_status iab_run_experiment(const char* config_path, const char* options_json, char** out_csv);

/* Best-of-n evaluation of a stored checkpoint on a scenario; returns a JSON
 * summary {full_coverage_rate, mean_nodes, min_nodes, max_nodes, best_plan}. */
iab_status iab_evaluate_checkpoint(const iab_scenario* scenario, const char* checkpoint_path, int n_tests,
                                   char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IABDEPLOY_H */

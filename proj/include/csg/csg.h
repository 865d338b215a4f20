/* C interface to the concurrent stochastic game library.
 *
 * Handles are opaque and owned by the caller; release them with the
 * matching *_free function. Strings returned through char** are allocated by
 * the library and released with csg_string_free. Every call returns a
 * csg_status; on failure csg_last_error() describes the problem (the text is
 * per thread and valid until the next failing call on that thread).
 */
#ifndef CSG_CSG_H
#define CSG_CSG_H

#include <stddef.h>
#include <stdint.h>

#if defined(CSG_BUILDING_LIBRARY)
#define CSG_API __attribute__((visibility("default")))
#else
#define CSG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csg_status {
  CSG_OK = 0,
  CSG_NON_POSITIVE_PROB = 1,
  CSG_SUM_NOT_ONE = 2,
  CSG_ILLEGAL_ACTION = 3,
  CSG_UNKNOWN_NAME = 4,
  CSG_BAD_PARAMS = 5,
  CSG_BAD_EPSILON = 6,
  CSG_NOT_FINITE_MEMORY = 7,
  CSG_K_NOT_FOUND = 8,
  CSG_UNDECIDABLE_TAIL = 9,
  CSG_MODE_OUT_OF_RANGE = 10,
  CSG_BOT_COLLISION = 11,
  CSG_GRID_TOO_COARSE = 12,
  CSG_UNSUPPORTED_ACTION = 13,
  CSG_NOT_INFINITE_BRANCHING_SPEC = 14,
  CSG_NOT_TURN_BASED = 15,
  CSG_NO_PROGRESS = 16,
  CSG_PRIVATE_MEMORY = 17,
  CSG_HORIZON_REQUIRED = 18,
  CSG_TRUNCATION_TOO_SMALL = 19,
  CSG_SINGULAR_SYSTEM = 20,
  CSG_OUT_OF_RANGE = 21,
  CSG_EVENT_NOT_PREFIX_DECIDABLE = 22,
  CSG_TOO_FEW_RETURNS = 23,
  CSG_WINDOW_TOO_LARGE = 24,
  CSG_CONFIG_INVALID = 25,
  CSG_ASSERTION_FAILED = 26,
  CSG_PARSE_ERROR = 27,
  CSG_IO_ERROR = 28,
  CSG_NOT_FINITE = 29,
  CSG_INVARIANT_VIOLATED = 30,
  CSG_NULL_ARGUMENT = 98,
  CSG_INTERNAL = 99
} csg_status;

typedef struct csg_game csg_game;
typedef struct csg_strategy csg_strategy;
typedef struct csg_values csg_values;

CSG_API const char* csg_version(void);
CSG_API const char* csg_last_error(void);
/* "Ok", "SumNotOne", ... */
CSG_API const char* csg_status_name(csg_status status);
CSG_API void csg_string_free(char* s);

/* ---- games. `params` is "k=v k=v" and may be NULL. */
CSG_API csg_status csg_game_builtin(const char* name, const char* params, csg_game** out);
CSG_API csg_status csg_game_load(const char* path, csg_game** out);
CSG_API csg_status csg_game_parse(const char* text, csg_game** out);
/* leaky, unfold, fix_action, ladder, delay, truncate */
CSG_API csg_status csg_game_transform(const csg_game* game, const char* name, const char* params, csg_game** out);
CSG_API csg_status csg_game_write(const csg_game* game, char** text);
CSG_API csg_status csg_game_name(const csg_game* game, char** name);
CSG_API csg_status csg_game_initial_state(const csg_game* game, char** id);
/* Finite games only (CSG_NOT_FINITE otherwise). */
CSG_API csg_status csg_game_num_states(const csg_game* game, size_t* n);
CSG_API void csg_game_free(csg_game* game);

/* ---- strategies */
CSG_API csg_status csg_strategy_make(const char* name, const char* params, csg_strategy** out);
CSG_API csg_status csg_strategy_load(const char* path, csg_strategy** out);
CSG_API csg_status csg_strategy_parse(const char* text, csg_strategy** out);
CSG_API csg_status csg_strategy_write(const csg_strategy* strategy, char** text);
CSG_API csg_status csg_strategy_describe(const csg_strategy* strategy, char** text);
CSG_API void csg_strategy_free(csg_strategy* strategy);

/* ---- solving. `objective` is "reach", "safety" or "buchi"; `target` is
 * "targets" (the game's own target flags) or state ids or names separated
 * by ';'. `exact` != 0 requests rational arithmetic (reach and safety).
 * max_iters = 0 and tol < 0 select the defaults. */
CSG_API csg_status csg_solve(const csg_game* game, const char* objective, const char* target, int exact,
                             size_t max_iters, double tol, csg_values** out);
CSG_API csg_status csg_values_count(const csg_values* values, size_t* n);
/* State id, float value and (exact runs) the fraction, or "" otherwise. */
CSG_API csg_status csg_values_entry(const csg_values* values, size_t i, char** state, double* value, char** exact);
CSG_API csg_status csg_values_at(const csg_values* values, const char* state, double* value);
CSG_API csg_status csg_values_iterations(const csg_values* values, size_t* iterations, int* converged);
/* "state,name,value,exact" lines with a header. */
CSG_API csg_status csg_values_csv(const csg_values* values, char** text);
/* Memoryless Max strategy playing the locally optimal mixed actions. */
CSG_API csg_status csg_values_strategy(const csg_values* values, csg_strategy** out);
CSG_API void csg_values_free(csg_values* values);

/* ---- simulation. `event` is "reach", "safety", "avoid_bot",
 * "reach_constrained constraint=<ids>" or "windowed_buchi k=<n> window=<w>";
 * `target` as for csg_solve. The report is one JSON object. */
CSG_API csg_status csg_estimate(const csg_game* game, const csg_strategy* max_strategy,
                                const csg_strategy* min_strategy, const char* event, const char* target,
                                int64_t horizon, size_t plays, uint64_t seed, unsigned jobs, char** report);
/* Plays streams 0..plays-1 and writes them to `path` in the binary trace
 * format. */
CSG_API csg_status csg_simulate_trace(const csg_game* game, const csg_strategy* max_strategy,
                                      const csg_strategy* min_strategy, int64_t horizon, size_t plays, uint64_t seed,
                                      const char* path);
/* One JSON object per play: steps, final state, sink flag. */
CSG_API csg_status csg_simulate_jsonl(const csg_game* game, const csg_strategy* max_strategy,
                                      const csg_strategy* min_strategy, int64_t horizon, size_t plays, uint64_t seed,
                                      char** text);

/* ---- experiments. out_dir may be NULL; seed < 0 keeps the config seed;
 * jobs = 0 keeps the config value. `summary` receives the summary text
 * (also on CSG_ASSERTION_FAILED) and may be NULL. */
CSG_API csg_status csg_run_experiment(const char* config_path, const char* out_dir, int64_t seed, unsigned jobs,
                                      char** summary);

#ifdef __cplusplus
}
#endif

#endif

#ifndef GUARDSYNTH_H
#define GUARDSYNTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a synthesis run.
typedef enum GsOutcome {
  GS_OUTCOME_PRIORITIES_FOUND = 0,
  GS_OUTCOME_ERROR_UNREACHABLE = 1,
  GS_OUTCOME_INITIAL_IS_ERROR = 2,
  GS_OUTCOME_CIRCULARITY_ABORT = 3,
  GS_OUTCOME_BOUND_EXHAUSTED = 4,
} GsOutcome;

// Result code of every fallible call.
typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_ARGUMENT = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  GS_STATUS_PARSE_ERROR = 3,
  GS_STATUS_SOLVER_ERROR = 4,
  GS_STATUS_SYNTHESIS_ERROR = 5,
  GS_STATUS_TRANSFORM_ERROR = 6,
  GS_STATUS_SEMANTICS_ERROR = 7,
  GS_STATUS_INVALID_ARGUMENT = 8,
  GS_STATUS_PANIC = 9,
} GsStatus;

// A parsed, validated network.
typedef struct GsNetwork GsNetwork;

// An error formula checked against a network.
typedef struct GsQuery GsQuery;

// The result of a synthesis run.
typedef struct GsReport GsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread; empty after a
// success. Valid until the next call on the same thread.
const char *gs_last_error(void);

// Library version as a static string.
const char *gs_version(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void gs_string_free(char *s);

// Parses and validates a network.
//
// # Safety
// `source` must be a nul-terminated string; `out` must be writable.
enum GsStatus gs_network_parse(const char *source, struct GsNetwork **out);

// # Safety
// `net` must come from this library and not have been freed. Null is ignored.
void gs_network_free(struct GsNetwork *net);

// Prints a network in the model language.
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum GsStatus gs_network_print(const struct GsNetwork *net, char **out);

// Number of automata, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
size_t gs_network_automaton_count(const struct GsNetwork *net);

// Total number of edges, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
size_t gs_network_edge_count(const struct GsNetwork *net);

// Counts the states reachable within `depth` steps with every variable
// kept in `lo..=hi`. `exact` is set when the search was exhaustive.
//
// # Safety
// `net` must be a live handle; `count` and `exact` must be writable.
enum GsStatus gs_reach_count(const struct GsNetwork *net,
                             uint32_t depth,
                             int64_t lo,
                             int64_t hi,
                             size_t *count,
                             bool *exact);

// Parses an `EF (...)` formula and checks it against `net`.
//
// # Safety
// `source` must be a nul-terminated string, `net` a live handle and `out`
// writable.
enum GsStatus gs_query_parse(const char *source, const struct GsNetwork *net, struct GsQuery **out);

// # Safety
// `q` must come from this library and not have been freed. Null is ignored.
void gs_query_free(struct GsQuery *q);

// Runs synthesis with unfolding bound `max`. `solver` may be null for
// `z3` on the search path; `timeout_secs` <= 0 keeps the default.
//
// # Safety
// `net` and `query` must be live handles, `solver` null or a
// nul-terminated string, and `out` writable.
enum GsStatus gs_synthesize(const struct GsNetwork *net,
                            const struct GsQuery *query,
                            uint32_t max,
                            const char *solver,
                            double timeout_secs,
                            struct GsReport **out);

// # Safety
// `r` must come from this library and not have been freed. Null is ignored.
void gs_report_free(struct GsReport *r);

// # Safety
// `r` must be a live handle and `out` writable.
enum GsStatus gs_report_outcome(const struct GsReport *r, enum GsOutcome *out);

// Number of stateful priorities, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live handle.
size_t gs_report_priority_count(const struct GsReport *r);

// The structured report as JSON.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum GsStatus gs_report_json(const struct GsReport *r, char **out);

// Applies the report's priorities to `net`, yielding a new network.
//
// # Safety
// `net` and `r` must be live handles and `out` writable.
enum GsStatus gs_transform(const struct GsNetwork *net,
                           const struct GsReport *r,
                           struct GsNetwork **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GUARDSYNTH_H */

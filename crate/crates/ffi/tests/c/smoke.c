#include <stdio.h>
#include <string.h>
#include "guardsynth.h"

static const char *NET =
    "network Pair {\n"
    "  automaton A0 { init 1; locations 1, 2, 3; edge 1 -> 2 on a; edge 1 -> 3 on b; }\n"
    "  automaton A1 { init 1; locations 1, 2; edge 1 -> 2 on c; }\n"
    "}\n";

int main(void) {
    GsNetwork *net = NULL;
    GsQuery *q = NULL;
    GsReport *rep = NULL;
    GsNetwork *rho = NULL;
    char *json = NULL;
    GsOutcome outcome;

    if (gs_network_parse(NET, &net) != GS_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", gs_last_error());
        return 1;
    }
    if (gs_network_parse("network {", &rho) != GS_STATUS_PARSE_ERROR || strlen(gs_last_error()) == 0) {
        return 2;
    }
    if (gs_query_parse("EF (A0.2 && A1.2)", net, &q) != GS_STATUS_OK) return 3;
    if (gs_synthesize(net, q, 5, NULL, 0.0, &rep) != GS_STATUS_OK) {
        fprintf(stderr, "synth: %s\n", gs_last_error());
        return 4;
    }
    if (gs_report_outcome(rep, &outcome) != GS_STATUS_OK) return 5;
    if (gs_report_json(rep, &json) != GS_STATUS_OK || strstr(json, "\"schema_version\": 1") == NULL) return 6;
    if (gs_transform(net, rep, &rho) != GS_STATUS_OK) return 7;
    printf("outcome %d priorities %zu edges %zu\n", (int)outcome, gs_report_priority_count(rep),
           gs_network_edge_count(rho));
    gs_string_free(json);
    gs_network_free(rho);
    gs_report_free(rep);
    gs_query_free(q);
    gs_network_free(net);
    return 0;
}

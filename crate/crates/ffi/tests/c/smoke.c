#include <stdio.h>
#include <string.h>
#include "harmory.h"

int main(void) {
    HarmoryChord *c = NULL, *g = NULL;
    if (harmory_chord_parse("C:maj", &c) != HARMORY_STATUS_OK) return 1;
    if (harmory_chord_parse("G:maj", &g) != HARMORY_STATUS_OK) return 1;
    double d = -1.0;
    if (harmory_tps_distance(c, g, "C:maj", &d) != HARMORY_STATUS_OK || d != 5.0) return 2;

    HarmoryChord *bad = NULL;
    if (harmory_chord_parse("H:maj", &bad) != HARMORY_STATUS_PARSE_ERROR) return 3;
    if (harmory_last_error_message() == NULL) return 3;

    HarmoryTimeline *tl = NULL;
    if (harmory_timeline_from_chart("0 4 C:maj\n4 4 G:maj\n", &tl) != HARMORY_STATUS_OK) return 4;
    double s = 0.0;
    if (harmory_similarity(tl, tl, HARMORY_MEASURE_DTW, &s) != HARMORY_STATUS_OK || s != 1.0) return 5;

    const HarmoryTimeline *pieces[1] = {tl};
    HarmoryMemory *m = NULL;
    if (harmory_memory_build(pieces, 1, 0.6, 0.9, &m) != HARMORY_STATUS_OK) return 6;
    char *nt = NULL;
    if (harmory_memory_export_ntriples(m, &nt) != HARMORY_STATUS_OK || strstr(nt, "hasSegment") == NULL) return 7;

    harmory_string_free(nt);
    harmory_memory_free(m);
    harmory_timeline_free(tl);
    harmory_chord_free(c);
    harmory_chord_free(g);
    printf("ok %s\n", harmory_version());
    return 0;
}

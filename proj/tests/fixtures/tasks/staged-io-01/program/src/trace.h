/* Statement-level trace instrumentation for fixture programs.
 *
 * When ITERFIX_TRACE_LOG names a file, STMT() records each executed
 * statement, TRACE_SOURCE() the attacker-controlled input site and
 * SAN_CHECK() the faulting sink. SAN_CHECK() plays the role of a sanitizer:
 * on a violation it reports the tag on stderr and aborts. */
#ifndef FIXTURE_TRACE_H
#define FIXTURE_TRACE_H

#include <stdio.h>
#include <stdlib.h>

static FILE *trace_out(void)
{
    static int opened = 0;
    static FILE *fp = NULL;
    if (!opened) {
        const char *path = getenv("ITERFIX_TRACE_LOG");
        opened = 1;
        if (path != NULL)
            fp = fopen(path, "w");
    }
    return fp;
}

#define TRACE_EMIT(...)                                                  \
    do {                                                                 \
        FILE *trace_fp_ = trace_out();                                   \
        if (trace_fp_ != NULL) {                                         \
            fprintf(trace_fp_, __VA_ARGS__);                             \
            fflush(trace_fp_);                                           \
        }                                                                \
    } while (0)

#define TRACE_TOTAL(n) TRACE_EMIT("TOTAL %d\n", (n))
#define TRACE_SOURCE() TRACE_EMIT("SOURCE %s:%d\n", __FILE__, __LINE__)
#define STMT() TRACE_EMIT("STMT %s:%d\n", __FILE__, __LINE__)

#define SAN_CHECK(bad, cwe, tag)                                         \
    do {                                                                 \
        if (bad) {                                                       \
            TRACE_EMIT("SINK %s:%d %s\n", __FILE__, __LINE__, cwe);      \
            fprintf(stderr, "ERROR: sanitizer: %s\n", tag);              \
            fflush(stderr);                                              \
            abort();                                                     \
        }                                                                \
    } while (0)

#endif

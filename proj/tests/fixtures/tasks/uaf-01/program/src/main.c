#include <limits.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "trace.h"

#define TOTAL_STATEMENTS 10

static size_t load_payload(const char *path, unsigned char *data, size_t cap)
{
    FILE *fp = fopen(path, "rb");
    size_t n;
    if (fp == NULL)
        return 0;
    n = fread(data, 1, cap, fp);
    fclose(fp);
    return n;
}

struct session {
    int value;
};

static void *freed_last;

static struct session *session_new(void)
{
    struct session *s = malloc(sizeof *s);
    if (s != NULL)
        s->value = 7;
    return s;
}

static void session_free(struct session *s)
{
    free(s);
    freed_last = s;
}

int process_session(const unsigned char *data, size_t len)
{
    STMT(); struct session *s = session_new();
    STMT(); int close_early = len > 0 && data[0] == 'C';
    STMT(); if (close_early) session_free(s);
    SAN_CHECK((void *)s == freed_last, "CWE-416", "heap-use-after-free");
    STMT(); return s->value;
}

int main(int argc, char **argv)
{
    unsigned char data[512];
    size_t len;
    int result;
    TRACE_TOTAL(TOTAL_STATEMENTS);
    if (argc < 2)
        return 2;
    TRACE_SOURCE(); len = load_payload(argv[1], data, sizeof data - 1);
    memset(data + len, 0, sizeof data - len);
    result = process_session(data, len);
    printf("result %d\n", result);
    return 0;
}

#include <stdio.h>
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

int copy_record(const unsigned char *data, size_t len, char *out, size_t cap)
{
    STMT(); size_t n;
    STMT(); if (len < 1) return -1;
    STMT(); n = data[0];
    SAN_CHECK(n > cap, "CWE-119", "stack-buffer-overflow");
    STMT(); memcpy(out, data + 1, n);
    return (int)n;
}

int main(int argc, char **argv)
{
    unsigned char data[512];
    char out[16];
    size_t len;
    TRACE_TOTAL(TOTAL_STATEMENTS);
    if (argc < 2)
        return 2;
    TRACE_SOURCE(); len = load_payload(argv[1], data, sizeof data);
    memset(data + len, 0, sizeof data - len);
    if (copy_record(data, len, out, sizeof out) < 0)
        printf("rejected\n");
    else
        printf("copied\n");
    return 0;
}

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

int checksum_frame(const unsigned char *data, size_t len)
{
    STMT(); char frame[8];
    STMT(); size_t n = data[0];
    SAN_CHECK(n > sizeof frame, "CWE-119", "stack-buffer-overflow");
    STMT(); memcpy(frame, data + 1, n);
    return frame[0];
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
    result = checksum_frame(data, len);
    printf("result %d\n", result);
    return 0;
}

#include <stdio.h>

int main(int argc, char **argv)
{
    volatile int *target = NULL;
    (void) argv;
    if (argc > 1)
        *target = 42;
    return 0;
}

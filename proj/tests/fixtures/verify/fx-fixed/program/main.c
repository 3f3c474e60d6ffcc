#include <stdio.h>

int main(int argc, char **argv)
{
    FILE *fp = argc > 1 ? fopen(argv[1], "rb") : NULL;
    if (fp != NULL)
        fclose(fp);
    printf("handled input\n");
    return 0;
}

int h(int x, int y)
{
    int q = x / y;
    int r = x % y;
    return q + r;
}

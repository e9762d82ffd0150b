#include <cstdio>
int main(){ std::puts("bpfopt"); return 0; }

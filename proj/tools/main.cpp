#include <cstdio>
int main(){ std::puts("epivar"); return 0; }

#include <cstdio>

int main() {
    std::puts("mhdlab: placeholder");
    return 1;
}

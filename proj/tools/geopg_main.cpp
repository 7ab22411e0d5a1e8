#include <cstdio>

int main() {
  std::puts("geopg cli: not wired yet");
  return 0;
}

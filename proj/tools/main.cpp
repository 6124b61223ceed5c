#include <cstdio>

int main() {
  std::puts("dimerlab: CLI not wired yet");
  return 1;
}

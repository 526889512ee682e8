// Writes the deterministic demo clip (frames + wav) into a directory.
// Usage: avgraph_make_fixture <out_dir>

#include <cstdio>
#include <exception>

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <out_dir>\n", argv[0]);
    return 1;
  }
  try {
    fixture::write_clip(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::printf("wrote %s/frames and %s/clip.wav\n", argv[1], argv[1]);
  return 0;
}

// Misbehaving controllers for harness tests. The first argument picks the
// behaviour:
//   full-throttle  CMD 1 0 on every tick
//   out-of-range   CMD 1.5 0.0
//   crash          exits after the handshake
//   silent         handshakes, then never answers a tick
//   bad-exit       behaves, but exits 3 after END
#include <chrono>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "full-throttle";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line == "HELLO v1") {
      std::cout << "READY scripted-" << mode << "\n" << std::flush;
      if (mode == "crash") return 7;
    } else if (line == "END") {
      return mode == "bad-exit" ? 3 : 0;
    } else if (line.rfind("TICK ", 0) == 0) {
      if (mode == "silent") {
        std::this_thread::sleep_for(std::chrono::seconds(30));
        return 0;
      }
      std::cout << (mode == "out-of-range" ? "CMD 1.5 0.0" : "CMD 1.0000 0.0000") << "\n"
                << std::flush;
    } else {
      return 1;
    }
  }
  return 1;
}

// Speaks the line protocol on stdin/stdout around computeAccCommand.
#include <cstdio>
#include <iostream>
#include <string>

#include "acc_api.h"

int main() {
  std::ios::sync_with_stdio(false);
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "HELLO v1") {
      std::cout << "READY acc-candidate\n" << std::flush;
    } else if (line == "END") {
      return 0;
    } else if (line.rfind("TICK ", 0) == 0) {
      double t, v, a, gap, rel;
      if (std::sscanf(line.c_str(), "TICK %lf %lf %lf %lf %lf", &t, &v, &a, &gap, &rel) != 5) {
        return 1;
      }
      const AccCommand cmd = computeAccCommand(v, a, gap, rel);
      // Out-of-range or NaN values are passed through so the harness sees them.
      char buf[96];
      std::snprintf(buf, sizeof buf, "CMD %.4f %.4f%s\n", cmd.throttle, cmd.brake,
                    cmd.emergency ? " EMERGENCY" : "");
      std::cout << buf << std::flush;
    } else {
      return 1;
    }
  }
  return 1;
}

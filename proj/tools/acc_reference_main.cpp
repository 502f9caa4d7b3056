// Reference ACC controller on stdin/stdout. Optional argument: a behaviour
// spec YAML whose limits the policy should honour.
#include <iostream>

#include "safegen/errors.hpp"
#include "safegen/sim/reference_controller.hpp"
#include "safegen/spec_model.hpp"

int main(int argc, char** argv) {
  safegen::BehaviorSpec behavior;
  if (argc > 1) {
    try {
      behavior = safegen::load_behavior_spec(argv[1]);
    } catch (const safegen::Error& e) {
      std::cerr << "safegen-acc-reference: " << e.what() << '\n';
      return 1;
    }
  }
  const safegen::sim::ReferenceController controller(behavior);
  std::ios::sync_with_stdio(false);
  return safegen::sim::serve_controller(
      std::cin, std::cout, "reference",
      [&](const safegen::sim::TickMessage& t) { return controller.command(t); });
}

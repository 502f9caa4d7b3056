#include "safegen/errors.hpp"

namespace safegen {

SchemaError::SchemaError(std::string path, const std::string& what)
    : Error(path + ": " + what), path_(std::move(path)) {}

ContextOverflow::ContextOverflow(std::size_t length, std::size_t budget)
    : Error("prompt of " + std::to_string(length) +
            " characters exceeds the context budget of " +
            std::to_string(budget)),
      length_(length),
      budget_(budget) {}

}  // namespace safegen

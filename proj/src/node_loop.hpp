#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "statgeo/variational.hpp"

namespace statgeo::detail {

// Runs fn(k) for k in [0, count). Exceptions are collected per index and the
// one with the lowest index is rethrown, so both modes fail identically.
template <class Fn>
void for_nodes(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long k = 0; k < n; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace statgeo::detail

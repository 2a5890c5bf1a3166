#include "riskmppi/parallel.hpp"

#include <cstdlib>
#include <string>

namespace riskmppi {

namespace {
constexpr int kMaxWorkers = 64;
}

int resolve_workers(int requested) {
  if (requested > 0) return std::min(requested, kMaxWorkers);
  if (const char* env = std::getenv("RISKMPPI_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<int>(std::min<long>(n, kMaxWorkers));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min<unsigned>(hw, kMaxWorkers));
}

}  // namespace riskmppi

#include "hkquad/par.hpp"

#include <cstdlib>
#include <string>

namespace hk {

int thread_cap() {
  static const int cap = [] {
    int hw = omp_get_max_threads();
    if (const char* env = std::getenv("HKQUAD_THREADS")) {
      try {
        int v = std::stoi(env);
        if (v > 0) return v < hw ? v : hw;
      } catch (...) {
      }
    }
    return hw;
  }();
  return cap;
}

}  // namespace hk

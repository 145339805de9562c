#include "world4d/parallel.hpp"

#include <cstdlib>
#include <string>

namespace world4d {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WORLD4D_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace world4d

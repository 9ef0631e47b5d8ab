#pragma once

#include <cstdlib>
#include <string>

namespace bdrn::runtime {

/// Worker count for the OpenMP kernels. Defaults to 1 (fully serial and
/// bitwise deterministic); override via set_workers() or NILM_WORKERS.
inline int& workers_ref() {
    static int n = [] {
        if (const char* e = std::getenv("NILM_WORKERS")) {
            int v = std::atoi(e);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return n;
}

inline int workers() { return workers_ref(); }
inline void set_workers(int n) { workers_ref() = n < 1 ? 1 : n; }

}  // namespace bdrn::runtime

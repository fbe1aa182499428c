#include "qrc/exec.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qrc {

int configure_workers() {
#ifdef _OPENMP
    if (const char* env = std::getenv("QRC_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                omp_set_num_threads(n);
            }
        } catch (const std::exception&) {
            // ignore malformed values; the OpenMP default stays in effect
        }
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

bool use_parallel(Exec exec) {
#ifdef _OPENMP
    return exec == Exec::parallel;
#else
    (void)exec;
    return false;
#endif
}

}  // namespace qrc

#include "scp/exec.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scp {

namespace {
ExecMode g_mode = ExecMode::openmp;
}

ExecMode default_exec_mode() { return g_mode; }

void set_default_exec_mode(ExecMode mode) { g_mode = mode; }

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace scp

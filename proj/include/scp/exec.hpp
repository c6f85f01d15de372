#pragma once

namespace scp {

// Execution policy for the data-parallel kernels (batch sphere evaluation,
// penalty quadrature, sweep trials). Both paths produce bit-identical
// results: parallel variants reduce per-item partials in a fixed order.
enum class ExecMode { serial, openmp };

ExecMode default_exec_mode();
void set_default_exec_mode(ExecMode mode);

// Threads the openmp mode will use (1 when built without OpenMP).
int hardware_threads();

}  // namespace scp

#pragma once

namespace tmg {

// Serial is the reference path; Parallel runs the same per-item work under OpenMP
// and reduces in index order, so both produce identical bits.
enum class Exec { Serial, Parallel };

int available_threads();

}  // namespace tmg

#pragma once

namespace conceptpose {

/// Selects between the OpenMP kernels and the serial reference loops.
/// Both paths produce bit-identical results.
enum class Execution { Serial, Parallel };

}  // namespace conceptpose

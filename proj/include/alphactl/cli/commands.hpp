#pragma once

#include <ostream>

namespace alphactl::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kConfigError = 2, kNumericalAbort = 3 };

/// Entry point of the alpha-control tool:
///   alpha-control <simulate|tangent|adjoint|optimize|verify> --config <path> --out <dir>
///                 [--workers n] [--suite s]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alphactl::cli

#pragma once

// Command-line front end. `run` is the whole program minus process setup, so
// tests can drive it with argument vectors and captured streams.
//
// Exit codes: 0 success, 1 numeric failure, 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace btspec::cli {

inline constexpr const char* kSchema = "btspec-result-v1";

enum ExitCode : int { kSuccess = 0, kNumericFailure = 1, kUsageError = 2 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed-point with `digits` decimals via std::to_chars; never prints "-0.000".
std::string format_fixed(double value, int digits);
/// Shortest round-trip representation via std::to_chars.
std::string format_shortest(double value);
/// "a+bi" / "a-bi" with both parts in format_fixed.
std::string format_complex(double re, double im, int digits);

}  // namespace btspec::cli

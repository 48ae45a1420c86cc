#pragma once

#include <stdexcept>
#include <string>

#include "CLI11.hpp"

// Shared plumbing for the ipuctl subcommand translation units.
//
// Exit-code map (documented in docs/formats.md):
//   0  success
//   1  unexpected internal error
//   2  bad arguments or malformed input files
//   3  partial result (some rows evaluated, some rejected)
//   4  no reply from the satellite within the retry budget
//   5  remote path error (missing, escapes the storage root, already exists)
//   6  integrity failure (checksum mismatch, incomplete transfer)
//   7  request rejected by the satellite (bad request, no session, too large,
//      read-only or mistyped parameter)
//   8  remote execution failed (workload fault/timeout, self-test mismatch)
//   9  protocol error (malformed traffic, satellite-side I/O fault)

namespace ipuctl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPartial = 3;
inline constexpr int kExitTimeout = 4;
inline constexpr int kExitFile = 5;
inline constexpr int kExitIntegrity = 6;
inline constexpr int kExitRejected = 7;
inline constexpr int kExitRemoteFault = 8;
inline constexpr int kExitProtocol = 9;

// Thrown from command callbacks; main() turns it into the process exit code.
// An empty message means the callback already printed its diagnostics.
struct CliError : std::runtime_error {
    int code;
    CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
};

// Reads a whole file or throws CliError(kExitInput).
std::string slurp_file(const std::string& path);

void register_plan(CLI::App& app);
void register_evaluate(CLI::App& app);
void register_sat(CLI::App& app);
void register_serve(CLI::App& app);

}  // namespace ipuctl

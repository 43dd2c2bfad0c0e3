#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace gridmix::cli {

// Runs one subcommand (prepare, balance, optimize, report) and returns the
// process exit code: 0 on success, 1 on any error, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_file(const std::filesystem::path& path);

// manifest.json of a run directory.
inline constexpr const char* kManifest = "manifest.json";

// Recomputes every digest listed in a manifest; returns the mismatches.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

}  // namespace gridmix::cli

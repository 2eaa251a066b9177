#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "edchrom/harness.hpp"
#include "edchrom/stepper.hpp"

namespace edchrom {

struct RunRequest;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Header `z,c1..cN,w1..wN`, one row per cell.
void write_profile_csv(std::ostream& out, const Snapshot& snapshot);

/// profile_t<time>.csv for every snapshot; returns the paths written.
std::vector<std::filesystem::path> emit_profiles(const std::filesystem::path& dir,
                                                 const std::vector<Snapshot>& snapshots);

/// Run manifest: config echo (reproducible config text), dt summary,
/// timings and mass ledger, as a JSON document.
std::string manifest_json(const RunRequest& request, const RunResult& result);

void write_manifest(const std::filesystem::path& dir, const RunRequest& request,
                    const RunResult& result);

/// Columns scheme,nu,Da,T,m,e_m,e_m_trimmed,theta_m,seconds,status.
void write_errors_csv(std::ostream& out, const std::vector<ErrorReport>& reports);
void emit_errors(const std::filesystem::path& path, const std::vector<ErrorReport>& reports);

/// Per scheme, a block of rows m = 100..1600 with columns e_m x 1e6 and
/// theta_m for each (D_a, nu) pair; theta is "-" where no 2m partner exists.
std::string format_table1(const std::vector<ErrorReport>& reports);

}  // namespace edchrom

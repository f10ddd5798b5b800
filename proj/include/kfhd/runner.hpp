#pragma once

#include "kfhd/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kfhd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;  // a monitored bound failed or the run aborted
inline constexpr int kExitInput = 2;      // bad config, missing inputs

const char* code_version();

struct OutputEntry {
    std::string file;  // relative to the output directory
    std::string kind;  // snapshot | particles | csv | json
    int member = -1;
    long long step = -1;
    double t = 0.0;
};

struct RunManifest {
    std::string command;
    bool complete = false;
    std::string status = "running";  // running | ok | invariant_failure | error
    std::string error;
    std::string config_hash;
    std::string config_text;  // canonical serialization, read back by `diagnose`
    std::uint64_t seed = 0;
    std::string scheme;
    GridSpec grid;
    int n = 0;
    std::string basis_digest;
    std::string version;
    std::string started_at;
    std::string finished_at;
    std::vector<OutputEntry> outputs;
    std::vector<std::string> warnings;
    std::vector<std::string> failures;
    std::vector<std::string> notes;
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);

// Writes `bytes` next to `path` and renames it into place.
void write_atomic(const std::string& path, const std::string& bytes);

struct RunRequest {
    std::string command;      // simulate | particles | diagnose | besov | kernel
    std::string config_path;  // optional for besov and kernel
    std::string out_dir;
    std::string input;        // diagnose: run directory; besov: snapshot file
    std::optional<double> besov_s;
    std::optional<double> besov_p;
    int threads = 0;          // 0 uses KFHD_THREADS
};

// Runs one command end to end. Messages go to `log`; the return value is the process exit status.
int orchestrate(const RunRequest& req, std::ostream& log);

}  // namespace kfhd

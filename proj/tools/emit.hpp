#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cyclelab/io.hpp"

// Output plumbing shared by every subcommand: tables rendered to CSV and a
// JSON mirror, a manifest carrying the fully resolved configuration and
// per-file digests, and a small index-claiming worker pool for grids.

namespace cycletool {

struct Table {
  std::string name;  // basename without extension
  cyclelab::io::Csv csv;
};

struct RunContext {
  std::string subcommand;
  std::string out_dir;
  std::string format;  // csv | json | both
  std::uint64_t seed = 0;
  int jobs = 1;
  cyclelab::io::Config resolved;  // every key the run actually used
};

// Writes the requested formats plus manifest.json; returns the list of file
// paths written. Bytes are deterministic functions of the inputs: reruns
// with an equal resolved configuration rewrite identical files.
std::vector<std::string> emit_tables(const RunContext& ctx,
                                     const std::vector<Table>& tables);

// Digest of the resolved configuration (sorted key=value lines), the value
// stored in the manifest and embedded in binary checkpoints.
std::string config_digest(const cyclelab::io::Config& resolved);

// Runs tasks(0..count-1) on `jobs` threads; any task exception is rethrown
// on the caller thread after all workers finish.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

}  // namespace cycletool

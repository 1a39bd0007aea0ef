#include "emit.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace cycletool {

using nlohmann::ordered_json;

std::string config_digest(const cyclelab::io::Config& resolved) {
  std::string flat;
  for (const auto& [key, value] : resolved.items()) {
    flat += key;
    flat += '=';
    flat += value;
    flat += '\n';
  }
  return cyclelab::io::hex_digest(flat);
}

std::vector<std::string> emit_tables(const RunContext& ctx,
                                     const std::vector<Table>& tables) {
  namespace fs = std::filesystem;
  fs::create_directories(ctx.out_dir);

  bool want_csv = ctx.format == "csv" || ctx.format == "both";
  bool want_json = ctx.format == "json" || ctx.format == "both";

  std::vector<std::string> written;
  ordered_json manifest_files = ordered_json::array();

  auto record = [&](const std::string& path, const std::string& bytes) {
    cyclelab::io::write_file_atomic(path, bytes);
    written.push_back(path);
    manifest_files.push_back({
        {"file", fs::path(path).filename().string()},
        {"bytes", bytes.size()},
        {"digest", cyclelab::io::hex_digest(bytes)},
    });
  };

  for (const Table& t : tables) {
    std::string base = ctx.out_dir + "/" + t.name;
    if (want_csv) record(base + ".csv", t.csv.serialize());
    if (want_json) {
      ordered_json mirror;
      mirror["table"] = t.name;
      mirror["columns"] = t.csv.header;
      ordered_json rows = ordered_json::array();
      for (const auto& row : t.csv.rows) rows.push_back(row);
      mirror["rows"] = rows;
      record(base + ".json", mirror.dump(2) + "\n");
    }
  }

  ordered_json manifest;
  manifest["tool"] = "cyclelab";
  manifest["version"] = CYCLELAB_VERSION;
  manifest["subcommand"] = ctx.subcommand;
  manifest["format"] = ctx.format;
  manifest["seed"] = ctx.seed;
  ordered_json cfg;
  for (const auto& [key, value] : ctx.resolved.items()) cfg[key] = value;
  manifest["config"] = cfg;
  manifest["config_digest"] = config_digest(ctx.resolved);
  manifest["outputs"] = manifest_files;

  std::string manifest_path = ctx.out_dir + "/manifest.json";
  cyclelab::io::write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  written.push_back(manifest_path);
  return written;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  int n_threads = std::min(jobs, count);
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cycletool

#include "run_dir.hpp"

#include <chrono>
#include <ctime>

#include "leakscope/errors.hpp"
#include "leakscope/io.hpp"

namespace leakscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

StageDir::StageDir(fs::path out, std::string stage, const json& config, std::string_view keep)
    : out_(std::move(out)), stage_(std::move(stage)), dir_(out_ / stage_),
      config_sha_(sha256_hex(config.dump())) {
  if (fs::exists(dir_)) {
    for (const auto& entry : fs::directory_iterator(dir_)) {
      if (!keep.empty() && entry.path().filename() == keep) continue;
      fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir_);
}

void StageDir::input(const fs::path& file) {
  inputs_[fs::relative(file, out_).string()] = sha256_file(file);
}

void StageDir::write(std::string_view name, std::string_view contents) {
  auto p = dir_ / name;
  fs::create_directories(p.parent_path());
  write_file_atomic(p, contents);
  outputs_[std::string(name)] = sha256_hex(contents);
}

void StageDir::adopt(std::string_view name) {
  outputs_[std::string(name)] = sha256_file(dir_ / name);
}

void StageDir::finish(const json& summary) {
  // The stage's content address: a hash over its output hashes.
  std::string all;
  for (const auto& [name, sha] : outputs_) all += name + "\t" + sha + "\n";
  json record = {{"stage", stage_},
                 {"finished", utc_now()},
                 {"config_sha256", config_sha_},
                 {"inputs", inputs_},
                 {"outputs", outputs_},
                 {"content_sha256", sha256_hex(all)},
                 {"summary", summary}};
  write_file_atomic(dir_ / "STAGE.json", record.dump(2) + "\n");
  append_line(out_ / "ledger.jsonl", record.dump());
}

bool stage_complete(const fs::path& out, std::string_view stage) {
  return fs::exists(out / stage / "STAGE.json");
}

void require_stage(const fs::path& out, std::string_view stage, std::string_view needed) {
  if (!stage_complete(out, needed))
    throw StageOrderError(std::string(stage) + " requires the " + std::string(needed) +
                          " stage to have run in " + out.string());
}

}  // namespace leakscope::cli

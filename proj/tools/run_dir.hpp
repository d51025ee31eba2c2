#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace leakscope::cli {

// One stage's output directory. Outputs are written atomically and hashed;
// finish() writes <stage>/STAGE.json and appends a line to <out>/ledger.jsonl.
class StageDir {
 public:
  // Clears any previous output of the stage unless `keep` names a file to
  // preserve (used by infer --resume for its journal).
  StageDir(std::filesystem::path out, std::string stage, const nlohmann::json& config,
           std::string_view keep = {});

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(std::string_view name) const { return dir_ / name; }

  void input(const std::filesystem::path& file);
  void write(std::string_view name, std::string_view contents);
  // Records a file that something else wrote into the stage directory.
  void adopt(std::string_view name);
  void finish(const nlohmann::json& summary = nlohmann::json::object());

 private:
  std::filesystem::path out_;
  std::string stage_;
  std::filesystem::path dir_;
  std::string config_sha_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

bool stage_complete(const std::filesystem::path& out, std::string_view stage);
// Throws StageOrderError unless `needed` has completed.
void require_stage(const std::filesystem::path& out, std::string_view stage, std::string_view needed);

}  // namespace leakscope::cli

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "config.hpp"

namespace leakscope::cli {

struct Context {
  RunConfig config;
  std::filesystem::path out;
  bool resume = false;
  std::ostream* log = nullptr;
};

// Each returns an exit code; errors propagate as exceptions.
int cmd_ingest(Context& ctx);
int cmd_synth(Context& ctx);
int cmd_filter(Context& ctx);
int cmd_audit(Context& ctx);
int cmd_cohort(Context& ctx);
int cmd_infer(Context& ctx);
int cmd_evaluate(Context& ctx);
int cmd_report(Context& ctx);

}  // namespace leakscope::cli

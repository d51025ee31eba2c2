#include "cli.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "leakscope/errors.hpp"

namespace leakscope::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disclosure audit and attribute-inference toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run", endpoint, model;
  std::size_t concurrency = 0;
  std::uint64_t seed = 0;
  bool resume = false, mock = false, show_defaults = false;

  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--out", out_dir, "Run directory")->capture_default_str();
  app.add_option("--endpoint", endpoint, "Chat-completion base URL");
  app.add_option("--model", model, "Model id sent to the endpoint");
  auto* concurrency_opt = app.add_option("--concurrency", concurrency, "In-flight requests")
                              ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for synthesis and sampling");
  app.add_flag("--resume", resume, "Reuse finished traces from an interrupted infer run");
  app.add_flag("--mock-oracle", mock, "Answer with the deterministic mock oracle");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(Context&);
  };
  const Sub subs[] = {
      {"ingest", "Parse donation files and the survey into a corpus", cmd_ingest},
      {"synth", "Generate a synthetic corpus with planted truths", cmd_synth},
      {"filter", "Entity flags, SAFE/UNSAFE verdicts and categories", cmd_filter},
      {"audit", "Discovery points, category tables and leak curve", cmd_audit},
      {"cohort", "Select the analytic cohort", cmd_cohort},
      {"infer", "Run the incremental-prefix inference protocol", cmd_infer},
      {"evaluate", "Score traces and emit evaluation tables", cmd_evaluate},
      {"report", "Collect tables and figures with an index page", cmd_report},
  };
  std::vector<CLI::App*> commands;
  for (const auto& s : subs) commands.push_back(app.add_subcommand(s.name, s.help)->fallthrough());
  auto* validate = app.add_subcommand("validate-config", "Check a configuration file")->fallthrough();
  validate->add_flag("--show-defaults", show_defaults, "Print every setting with its default");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (validate->parsed() && show_defaults) {
      out << default_config().dump(2) << "\n";
      return kOk;
    }
    Context ctx;
    ctx.config = load_config_file(config_path.empty() ? std::nullopt
                                                      : std::optional<std::filesystem::path>(config_path));
    auto& e = ctx.config.endpoint;
    if (!endpoint.empty()) e.base_url = endpoint;
    if (!model.empty()) e.model = model;
    if (concurrency_opt->count()) e.concurrency = concurrency;
    if (mock) e.mock = true;
    if (seed_opt->count()) {
      ctx.config.seed = seed;
      ctx.config.synth.seed = seed;
    }
    ctx.config.effective["endpoint"]["base_url"] = e.base_url;
    ctx.config.effective["endpoint"]["model"] = e.model;
    ctx.config.effective["endpoint"]["concurrency"] = e.concurrency;
    ctx.config.effective["endpoint"]["mock"] = e.mock;
    ctx.config.effective["seed"] = ctx.config.seed;
    ctx.config.effective["synth"] = ctx.config.synth.to_json();

    if (validate->parsed()) {
      out << "configuration OK\n" << ctx.config.effective.dump(2) << "\n";
      return kOk;
    }
    ctx.out = out_dir;
    ctx.resume = resume;
    ctx.log = &out;
    std::filesystem::create_directories(ctx.out);
    for (std::size_t i = 0; i < commands.size(); ++i)
      if (commands[i]->parsed()) return subs[i].fn(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StageOrderError& e) {
    err << "stage order error: " << e.what() << "\n";
    return kStageOrder;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace leakscope::cli

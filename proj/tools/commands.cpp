#include "commands.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include "leakscope/audit.hpp"
#include "leakscope/cohort.hpp"
#include "leakscope/csv.hpp"
#include "leakscope/disclosure_filter.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/evaluation.hpp"
#include "leakscope/inference.hpp"
#include "leakscope/ingestion.hpp"
#include "leakscope/io.hpp"
#include "leakscope/llm/gateway.hpp"
#include "leakscope/llm/http_endpoint.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/svg.hpp"
#include "leakscope/synth.hpp"
#include "cli.hpp"
#include "run_dir.hpp"

namespace leakscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kDonationFiles[] = {
    "conversations.json", "search_history.json", "youtube_search_history.json",
    "youtube_watch_history.json"};

std::ostream& log(Context& ctx) { return *ctx.log; }

// Resolves which corpus file the analysis stages read.
fs::path corpus_path(const Context& ctx) {
  const auto& c = ctx.config.corpus;
  if (c.source == "file" || (c.source == "auto" && c.file)) return *c.file;
  bool synth = stage_complete(ctx.out, "synth");
  bool ingest = stage_complete(ctx.out, "ingest");
  if (c.source == "synth" || (c.source == "auto" && synth && !ingest)) {
    if (!synth) throw StageOrderError("corpus.source is synth but the synth stage has not run");
    return ctx.out / "synth" / "corpus.jsonl";
  }
  if (c.source == "ingest" || (c.source == "auto" && ingest && !synth)) {
    if (!ingest) throw StageOrderError("corpus.source is ingest but the ingest stage has not run");
    return ctx.out / "ingest" / "corpus.jsonl";
  }
  if (synth && ingest)
    throw ConfigError("corpus.source: both synth and ingest outputs exist; choose one");
  throw StageOrderError("no corpus: run ingest or synth first, or set corpus.file");
}

std::vector<UserRecord> load_corpus(const Context& ctx, StageDir* stage) {
  auto path = corpus_path(ctx);
  if (stage) stage->input(path);
  auto users = read_corpus(path);
  for (const auto& u : users) {
    auto violations = validate_user(u);
    if (!violations.empty())
      throw SchemaError("corpus user " + u.user_id + ": " + violations.front().field + ": " +
                        violations.front().rule);
  }
  return users;
}

struct Oracle {
  std::unique_ptr<llm::LlmEndpoint> endpoint;
  std::unique_ptr<llm::LlmGateway> gateway;
};

Oracle make_oracle(const Context& ctx) {
  const auto& e = ctx.config.endpoint;
  Oracle o;
  if (e.mock) {
    o.endpoint = std::make_unique<llm::MockOracle>();
  } else {
    llm::HttpEndpointOptions opts;
    opts.base_url = e.base_url;
    opts.model = e.model;
    if (const char* key = std::getenv(e.api_key_env.c_str())) opts.api_key = key;
    opts.timeout = std::chrono::seconds(e.timeout_s);
    o.endpoint = std::make_unique<llm::HttpChatEndpoint>(std::move(opts));
  }
  llm::GatewayOptions g;
  g.settings.temperature = e.temperature;
  g.settings.max_tokens = e.max_tokens;
  g.retry.max_attempts = e.max_attempts;
  g.retry.initial_backoff = std::chrono::milliseconds(e.initial_backoff_ms);
  g.retry.max_backoff = std::chrono::milliseconds(e.max_backoff_ms);
  g.concurrency = e.concurrency;
  g.requests_per_second = e.requests_per_second;
  g.cache_dir = ctx.out / "cache";
  g.ledger_path = ctx.out / "llm_ledger.jsonl";
  o.gateway = std::make_unique<llm::LlmGateway>(*o.endpoint, std::move(g));
  return o;
}

json gateway_summary(const llm::LlmGateway& g) {
  return {{"model", g.model_id()},
          {"endpoint_calls", g.endpoint_calls()},
          {"cache_hits", g.cache_hits()},
          {"exhausted", g.exhausted()},
          {"cache_corrupt_entries", g.cache_corrupt_entries()}};
}

// Per-user filter output as stored in filter/annotations.jsonl.
struct Annotation {
  std::string user_id;
  std::string country;
  std::size_t length = 0;
  std::vector<EntityFlag> entities;
  std::vector<llm::Verdict> verdicts;
  std::vector<CategoryLabel> categories;
};

json annotation_json(const UserRecord& user, const std::vector<EntityFlag>& entities,
                     const std::vector<SafetyVerdict>& verdicts, const CategoryResult& cats) {
  json ents = json::array(), verds = json::array(), labels = json::array(),
       unknown = json::array();
  for (const auto& f : entities)
    ents.push_back({{"index", f.message_index}, {"kind", to_string(f.kind)}, {"surface", f.surface}});
  for (const auto& v : verdicts) {
    json entry = {{"index", v.message_index}, {"verdict", llm::to_string(v.verdict)}, {"raw", v.raw}};
    if (v.error) entry["error"] = *v.error;
    verds.push_back(std::move(entry));
  }
  for (const auto& l : cats.labels) labels.push_back({{"index", l.message_index}, {"category", l.category}});
  for (const auto& u : cats.unknown) unknown.push_back({{"index", u.message_index}, {"raw", u.raw}});
  const auto* chat = user.stream(StreamKind::ChatAssistant);
  return {{"user_id", user.user_id},
          {"country", user.profile.country},
          {"length", chat ? chat->size() : 0},
          {"entities", ents},
          {"verdicts", verds},
          {"categories", labels},
          {"unknown_categories", unknown},
          {"category_failures", cats.failed}};
}

std::vector<Annotation> read_annotations(const fs::path& path) {
  std::vector<Annotation> out;
  std::string text = read_file(path);
  std::string_view rest = text;
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    auto line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (line.empty()) continue;
    auto j = json::parse(line);
    Annotation a;
    a.user_id = j.at("user_id").get<std::string>();
    a.country = j.at("country").get<std::string>();
    a.length = j.at("length").get<std::size_t>();
    for (const auto& e : j.at("entities"))
      a.entities.push_back({e.at("index").get<std::size_t>(),
                            parse_entity_kind(e.at("kind").get<std::string>()).value(),
                            e.at("surface").get<std::string>()});
    for (const auto& v : j.at("verdicts"))
      a.verdicts.push_back(llm::parse_verdict_name(v.at("verdict").get<std::string>()).value());
    for (const auto& c : j.at("categories"))
      a.categories.push_back({c.at("index").get<std::size_t>(), c.at("category").get<std::string>()});
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::size_t> flagged_indices(const Annotation& a, FlagSource source) {
  std::set<std::size_t> idx;
  if (source != FlagSource::Entity)
    for (std::size_t i = 0; i < a.verdicts.size(); ++i)
      if (a.verdicts[i] == llm::Verdict::Unsafe) idx.insert(i);
  if (source != FlagSource::Unsafe)
    for (const auto& e : a.entities) idx.insert(e.message_index);
  return {idx.begin(), idx.end()};
}

std::string file_stem(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

}  // namespace

int cmd_ingest(Context& ctx) {
  const auto& c = ctx.config.corpus;
  if (!c.survey) throw ConfigError("corpus.survey: required by ingest");
  StageDir stage(ctx.out, "ingest", ctx.config.effective);
  auto survey = parse_survey_csv(read_file(*c.survey));

  std::vector<StreamSource> sources;
  auto add = [&](const std::string& user, StreamKind kind, const fs::path& path) {
    auto text = read_file(path);
    StreamSource s{user, kind, {}, path.string()};
    s.stream = kind == StreamKind::ChatAssistant ? parse_chat_export(text) : parse_search_log(text, kind);
    sources.push_back(std::move(s));
  };
  for (const auto& s : c.streams) add(s.user_id, s.kind, s.path);
  if (c.donations_dir) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(*c.donations_dir))
      if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs)
      for (std::size_t k = 0; k < std::size(kDonationFiles); ++k)
        if (fs::exists(d / kDonationFiles[k]))
          add(d.filename().string(), kAllStreamKinds[k], d / kDonationFiles[k]);
  }

  auto result = assemble_users(std::move(sources), survey);
  std::string report;
  for (const auto& line : result.report) report += line + "\n";
  stage.write("corpus.jsonl", serialize_corpus(result.users));
  stage.write("report.txt", report);
  stage.finish({{"users", result.users.size()}, {"report_lines", result.report.size()}});
  log(ctx) << "ingest: " << result.users.size() << " users, " << result.report.size()
           << " report lines\n";
  return 0;
}

int cmd_synth(Context& ctx) {
  StageDir stage(ctx.out, "synth", ctx.config.effective);
  auto corpus = generate(ctx.config.synth);
  stage.write("corpus.jsonl", serialize_corpus(corpus.users));
  stage.write("manifest.json", corpus.manifest_json().dump(2) + "\n");
  stage.write("spec.json", ctx.config.synth.to_json().dump(2) + "\n");
  stage.finish({{"users", corpus.users.size()}, {"seed", ctx.config.synth.seed}});
  log(ctx) << "synth: " << corpus.users.size() << " users\n";
  return 0;
}

int cmd_filter(Context& ctx) {
  StageDir stage(ctx.out, "filter", ctx.config.effective);
  auto users = load_corpus(ctx, &stage);
  auto oracle = make_oracle(ctx);

  std::unique_ptr<EntityFlagger> flagger;
  if (ctx.config.filter.ner_url)
    flagger = std::make_unique<HttpEntityFlagger>(*ctx.config.filter.ner_url);
  else if (ctx.config.filter.gazetteer)
    flagger = std::make_unique<GazetteerFlagger>(read_file(*ctx.config.filter.gazetteer),
                                                 ctx.config.filter.capitalized_sequences);
  const EntityFlagger& flag_with =
      flagger ? *flagger : static_cast<const EntityFlagger&>(GazetteerFlagger::builtin());
  EnglishGate gate(ctx.config.filter.english_threshold);

  std::string annotations;
  std::size_t messages = 0, unsafe = 0, unresolved = 0, unknown = 0, failed = 0, entities = 0;
  for (const auto& user : users) {
    const auto& chat = *user.stream(StreamKind::ChatAssistant);
    auto ents = flag_entities(chat, flag_with, gate);
    auto verdicts = classify_safety(chat, *oracle.gateway);
    auto cats = classify_category(chat, verdicts, *oracle.gateway);
    messages += chat.size();
    entities += ents.size();
    for (const auto& v : verdicts) {
      unsafe += v.verdict == llm::Verdict::Unsafe;
      unresolved += v.verdict == llm::Verdict::Unresolved;
    }
    unknown += cats.unknown.size();
    failed += cats.failed.size();
    annotations += annotation_json(user, ents, verdicts, cats).dump() + "\n";
  }
  json summary = {{"users", users.size()},
                  {"messages", messages},
                  {"entity_flags", entities},
                  {"unsafe", unsafe},
                  {"unresolved", unresolved},
                  {"unknown_categories", unknown},
                  {"category_failures", failed},
                  {"oracle", gateway_summary(*oracle.gateway)}};
  stage.write("annotations.jsonl", annotations);
  stage.write("report.json", summary.dump(2) + "\n");
  stage.finish(summary);
  log(ctx) << "filter: " << users.size() << " users, " << messages << " messages, " << unsafe
           << " UNSAFE, " << unresolved << " unresolved\n";
  return oracle.gateway->exhausted() ? kOracleExhausted : 0;
}

int cmd_audit(Context& ctx) {
  require_stage(ctx.out, "audit", "filter");
  StageDir stage(ctx.out, "audit", ctx.config.effective);
  auto annotations_path = ctx.out / "filter" / "annotations.jsonl";
  stage.input(annotations_path);
  auto annotations = read_annotations(annotations_path);
  const auto& cfg = ctx.config.audit;

  std::string discovery = "user_id,length,first_flag_index,discovery_point\n";
  std::vector<std::optional<double>> points;
  std::vector<UserFlags> curve_input;
  std::vector<LabeledDisclosure> labels;
  for (const auto& a : annotations) {
    auto idx = flagged_indices(a, cfg.flag_source);
    if (a.length == 0) continue;
    auto point = discovery_point(idx, a.length);
    points.push_back(point);
    discovery += csv_line({a.user_id, std::to_string(a.length),
                           idx.empty() ? "" : std::to_string(idx.front()),
                           point ? format_number(*point) : "absent"});
    curve_input.push_back({idx, a.length});
    for (const auto& c : a.categories) labels.push_back({c.category, a.country});
  }
  stage.write("discovery.csv", discovery);

  json summary = {{"users", annotations.size()}};
  bool any_point = std::any_of(points.begin(), points.end(), [](const auto& p) { return p.has_value(); });
  if (any_point) {
    auto s = discovery_summary(points, cfg.histogram_bin_width);
    std::vector<std::string> bins;
    std::vector<double> counts;
    for (std::size_t b = 0; b < s.histogram.size(); ++b) {
      bins.push_back(format_number(static_cast<double>(b) * s.bin_width));
      counts.push_back(static_cast<double>(s.histogram[b]));
    }
    summary["discovery"] = {{"present", s.count}, {"absent", s.absent}, {"mean", s.mean},
                            {"median", s.median}, {"bin_width", s.bin_width},
                            {"histogram", s.histogram}};
    stage.write("discovery_histogram.svg", svg::bar_chart("Discovery point (% of history)", bins, counts));
  } else {
    summary["discovery"] = {{"present", 0}, {"absent", points.size()}};
  }

  if (!labels.empty()) {
    stage.write("categories.csv", category_distribution(labels, GroupKey::All).to_csv());
    stage.write("categories_by_country.csv", category_distribution(labels, GroupKey::Country).to_csv());
  }
  summary["labelled_messages"] = labels.size();

  if (!curve_input.empty()) {
    auto curve = leak_curve(curve_input, cfg.curve_step);
    stage.write("leak_curve.csv", curve.to_csv());
    stage.write("leak_curve.svg", svg::line_chart("Cumulative flagged messages", curve.grid,
                                                  curve.mean_count, svg::Line{curve.slope, curve.intercept}));
    summary["leak_curve"] = {{"slope", curve.slope}, {"intercept", curve.intercept},
                             {"r_squared", curve.r_squared}};
  }
  stage.write("summary.json", summary.dump(2) + "\n");
  stage.finish(summary);
  log(ctx) << "audit: " << points.size() << " users\n";
  return 0;
}

int cmd_cohort(Context& ctx) {
  require_stage(ctx.out, "cohort", "filter");
  StageDir stage(ctx.out, "cohort", ctx.config.effective);
  auto users = load_corpus(ctx, &stage);
  auto annotations_path = ctx.out / "filter" / "annotations.jsonl";
  stage.input(annotations_path);
  std::map<std::string, std::vector<llm::Verdict>> verdicts;
  for (auto& a : read_annotations(annotations_path)) verdicts[a.user_id] = std::move(a.verdicts);
  auto result = build_cohort(users, verdicts, ctx.config.cohort);
  stage.write("manifest.csv", result.to_csv());
  json summary = {{"threshold", result.threshold},
                  {"included", result.included_ids().size()},
                  {"excluded", result.excluded_ids().size()}};
  stage.finish(summary);
  log(ctx) << "cohort: " << result.included_ids().size() << " included, "
           << result.excluded_ids().size() << " excluded (length floor " << result.threshold << ")\n";
  return 0;
}

int cmd_infer(Context& ctx) {
  require_stage(ctx.out, "infer", "cohort");
  constexpr std::string_view kJournal = "journal.jsonl";
  StageDir stage(ctx.out, "infer", ctx.config.effective, ctx.resume ? kJournal : std::string_view{});
  auto users = load_corpus(ctx, &stage);
  auto manifest_path = ctx.out / "cohort" / "manifest.csv";
  stage.input(manifest_path);
  auto cohort = parse_cohort_csv(read_file(manifest_path));
  auto ids = cohort.included_ids();
  std::set<std::string> included(ids.begin(), ids.end());
  std::vector<UserRecord> selected;
  for (auto& u : users)
    if (included.count(u.user_id)) selected.push_back(std::move(u));

  auto oracle = make_oracle(ctx);
  auto options = ctx.config.inference;
  options.journal = stage.path(kJournal);
  auto result = run_matrix(selected, options, *oracle.gateway);

  stage.write("traces.jsonl", serialize_traces(result.traces));
  std::string skipped = "user_id,attribute,kind,reason\n";
  for (const auto& s : result.skipped)
    skipped += csv_line({s.user_id, std::string(to_string(s.attribute)), std::string(to_string(s.kind)), s.reason});
  stage.write("skipped.csv", skipped);
  std::string failed = "user_id,attribute,kind,error\n";
  for (const auto& f : result.failed)
    failed += csv_line({f.user_id, std::string(to_string(f.attribute)), std::string(to_string(f.kind)), f.error});
  stage.write("failed.csv", failed);
  if (fs::exists(stage.path(kJournal))) stage.adopt(kJournal);
  json summary = {{"users", selected.size()},
                  {"traces", result.traces.size()},
                  {"skipped", result.skipped.size()},
                  {"failed", result.failed.size()},
                  {"resumed", result.resumed},
                  {"oracle", gateway_summary(*oracle.gateway)}};
  stage.write("summary.json", summary.dump(2) + "\n");
  stage.finish(summary);
  log(ctx) << "infer: " << result.traces.size() << " traces, " << result.skipped.size()
           << " skipped, " << oracle.gateway->endpoint_calls() << " endpoint calls, "
           << oracle.gateway->cache_hits() << " cache hits\n";
  return oracle.gateway->exhausted() ? kOracleExhausted : 0;
}

int cmd_evaluate(Context& ctx) {
  require_stage(ctx.out, "evaluate", "infer");
  StageDir stage(ctx.out, "evaluate", ctx.config.effective);
  auto traces_path = ctx.out / "infer" / "traces.jsonl";
  stage.input(traces_path);
  auto traces = parse_traces(read_file(traces_path));
  if (traces.empty()) throw EmptyInput("evaluate: the infer stage produced no traces");

  std::map<std::pair<Attribute, StreamKind>, std::vector<InferenceTrace>> groups;
  for (const auto& t : traces) groups[{t.attribute, t.kind}].push_back(t);

  json results = json::array();
  std::map<std::pair<Attribute, StreamKind>, double> f1;
  for (const auto& [key, group] : groups) {
    auto [attribute, kind] = key;
    auto matrix = score(group);
    std::vector<std::size_t> supports;
    for (const auto& m : matrix.metrics) supports.push_back(m.support);
    double baseline = majority_baseline(supports);
    f1[key] = matrix.weighted_f1;
    auto stem = file_stem(std::string(to_string(attribute)) + "_" + std::string(to_string(kind)));
    stage.write("confusion_" + stem + ".csv", matrix.to_csv());
    stage.write("metrics_" + stem + ".csv", matrix.metrics_csv());
    std::vector<std::vector<double>> values;
    for (const auto& row : matrix.counts) values.emplace_back(row.begin(), row.end());
    stage.write("confusion_" + stem + ".svg",
                svg::heatmap(std::string(to_string(attribute)) + " / " + std::string(to_string(kind)),
                             matrix.classes, matrix.column_labels(), values));
    results.push_back({{"attribute", to_string(attribute)},
                       {"kind", to_string(kind)},
                       {"n", matrix.total},
                       {"weighted_f1", matrix.weighted_f1},
                       {"majority_f1", baseline}});
  }
  stage.write("platform_table.csv", platform_table(f1).to_csv());

  for (auto [group, name] : {std::pair{ContextGroup::Attribute, "attribute"},
                             std::pair{ContextGroup::Class, "class"},
                             std::pair{ContextGroup::Kind, "kind"}}) {
    auto stats = context_stats(traces, group);
    stage.write(std::string("context_by_") + name + ".csv", context_stats_csv(stats));
    if (group == ContextGroup::Attribute) {
      for (const auto& [label, s] : stats) {
        std::vector<std::string> ks;
        std::vector<double> counts;
        for (int k : ctx.config.inference.schedule.percentages) {
          ks.push_back(std::to_string(k));
          auto it = s.histogram.find(k);
          counts.push_back(it == s.histogram.end() ? 0.0 : static_cast<double>(it->second));
        }
        ks.emplace_back("NR");
        counts.push_back(static_cast<double>(s.not_reached));
        stage.write("context_" + file_stem(label) + ".svg",
                    svg::bar_chart("Context needed: " + label, ks, counts));
      }
    }
  }

  stage.write("keywords.csv", keyword_counts(traces, ctx.config.evaluation.keywords).to_csv());

  std::map<std::string, const InferenceTrace*> by_key;
  for (const auto& t : traces) by_key[t.key()] = &t;
  std::string sample = "attribute,key,truth,final_label,rationale\n";
  std::set<Attribute> attributes;
  for (const auto& t : traces) attributes.insert(t.attribute);
  for (auto attribute : attributes) {
    for (const auto& key : stratified_sample(traces, attribute, ctx.config.evaluation.sample_per_class,
                                             ctx.config.seed)) {
      const auto* t = by_key.at(key);
      sample += csv_line({std::string(to_string(attribute)), key, t->truth,
                          t->outcome.final_label.value_or(""), t->outcome.rationale_at_stopping});
    }
  }
  stage.write("rationale_sample.csv", sample);

  json summary = {{"traces", traces.size()}, {"results", results}};
  stage.write("summary.json", summary.dump(2) + "\n");
  stage.finish(summary);
  for (const auto& r : results)
    log(ctx) << "evaluate: " << r["attribute"].get<std::string>() << "/" << r["kind"].get<std::string>()
             << " weighted F1 " << format_number(r["weighted_f1"].get<double>(), 4) << " (majority "
             << format_number(r["majority_f1"].get<double>(), 4) << ")\n";
  return 0;
}

int cmd_report(Context& ctx) {
  constexpr std::string_view kStages[] = {"ingest", "synth", "filter", "audit", "cohort", "infer", "evaluate"};
  bool any = std::any_of(std::begin(kStages), std::end(kStages),
                         [&](std::string_view s) { return stage_complete(ctx.out, s); });
  if (!any) throw StageOrderError("report requires at least one completed stage in " + ctx.out.string());
  StageDir stage(ctx.out, "report", ctx.config.effective);
  std::string html =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>Run report</title></head><body>\n"
      "<h1>Run report</h1>\n";
  for (auto name : kStages) {
    if (!stage_complete(ctx.out, name)) continue;
    html += "<h2>" + std::string(name) + "</h2>\n<ul>\n";
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ctx.out / name)) {
      auto ext = entry.path().extension();
      if (ext == ".csv" || ext == ".svg" || ext == ".json" || ext == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto rel = std::string(name) + "/" + f.filename().string();
      stage.write(rel, read_file(f));
      html += "<li><a href=\"" + svg::escape(rel) + "\">" + svg::escape(rel) + "</a></li>\n";
      if (f.extension() == ".svg") html += "<li><img src=\"" + svg::escape(rel) + "\" alt=\"\"></li>\n";
    }
    html += "</ul>\n";
  }
  html += "</body></html>\n";
  stage.write("index.html", html);
  stage.finish();
  log(ctx) << "report: " << (ctx.out / "report" / "index.html").string() << "\n";
  return 0;
}

}  // namespace leakscope::cli

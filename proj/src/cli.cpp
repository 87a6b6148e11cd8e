#include "biopatch/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "biopatch/attn.hpp"
#include "biopatch/error.hpp"
#include "biopatch/evalkit.hpp"
#include "biopatch/io.hpp"
#include "biopatch/similarity.hpp"

namespace biopatch {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {"seed",     "population",      "pool_sizes",
                                           "schedule", "anniversary_years", "wiki_per_subset",
                                           "variants", "paths"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k))
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("unknown key '") + k + "' in " + where);
}

}  // namespace

json to_json(const RunConfig& c) {
  json variants = json::array();
  for (const auto& v : c.variants) variants.push_back(to_json(v));
  return json{{"seed", c.seed},
              {"population", c.population},
              {"pool_sizes",
               {{"known", c.pool_sizes.known},
                {"test", c.pool_sizes.test},
                {"unknown", c.pool_sizes.unknown}}},
              {"schedule",
               {{"known_count", c.schedule.known_count},
                {"test_subgroup_counts", c.schedule.test_subgroup_counts},
                {"aux_count", c.schedule.aux_count}}},
              {"anniversary_years", c.anniversary_years},
              {"wiki_per_subset", c.wiki_per_subset},
              {"variants", std::move(variants)},
              {"paths",
               {{"names", c.paths.names.generic_string()},
                {"templates", c.paths.templates.generic_string()},
                {"people", c.paths.people.generic_string()},
                {"corpus", c.paths.corpus.generic_string()},
                {"wiki", c.paths.wiki.generic_string()},
                {"manifests", c.paths.manifests.generic_string()}}}};
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  try {
    reject_unknown(j, kConfigKeys, "config");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("population")) c.population = j.at("population").get<int>();
    if (j.contains("pool_sizes")) {
      const auto& p = j.at("pool_sizes");
      reject_unknown(p, {"known", "test", "unknown"}, "pool_sizes");
      c.pool_sizes.known = p.value("known", c.pool_sizes.known);
      c.pool_sizes.test = p.value("test", c.pool_sizes.test);
      c.pool_sizes.unknown = p.value("unknown", c.pool_sizes.unknown);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      reject_unknown(s, {"known_count", "test_subgroup_counts", "aux_count"}, "schedule");
      c.schedule.known_count = s.value("known_count", c.schedule.known_count);
      c.schedule.aux_count = s.value("aux_count", c.schedule.aux_count);
      if (s.contains("test_subgroup_counts"))
        c.schedule.test_subgroup_counts = s.at("test_subgroup_counts").get<std::vector<int>>();
    }
    if (j.contains("anniversary_years")) c.anniversary_years = j.at("anniversary_years").get<int>();
    if (j.contains("wiki_per_subset")) c.wiki_per_subset = j.at("wiki_per_subset").get<int>();
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) c.variants.push_back(variant_from_json(v));
    }
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      reject_unknown(p, {"names", "templates", "people", "corpus", "wiki", "manifests"}, "paths");
      auto set = [&](const char* key, fs::path& dst) {
        if (p.contains(key)) dst = p.at(key).get<std::string>();
      };
      set("names", c.paths.names);
      set("templates", c.paths.templates);
      set("people", c.paths.people);
      set("corpus", c.paths.corpus);
      set("wiki", c.paths.wiki);
      set("manifests", c.paths.manifests);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.schedule.validate();
  std::set<std::string> names;
  for (const auto& v : c.variants)
    if (v.name.empty() || !names.insert(v.name).second)
      throw Error(ErrorCode::kInvalidArgument, "config variants need distinct non-empty names");
  return c;
}

fs::path default_data_dir() {
  if (const char* env = std::getenv("BIOPATCH_DATA_DIR"); env && *env) return env;
  return BIOPATCH_DEFAULT_DATA_DIR;
}

namespace cli {

namespace {

void emit_warnings(const Warnings& warnings, std::ostream& err) {
  for (const auto& w : warnings)
    err << dump_compact({{"level", "warning"}, {"code", w.code}, {"message", w.message}}) << "\n";
}

void emit_error(std::string_view code, std::string_view message, std::ostream& err) {
  err << dump_compact({{"level", "error"}, {"code", code}, {"message", message}}) << "\n";
}

// Writes `doc` to `path` when given, else prints it.
void deliver(const json& doc, const fs::path& path, std::ostream& out) {
  if (path.empty()) {
    out << dump_pretty(doc);
    return;
  }
  OutputTransaction tx;
  tx.write(path, dump_pretty(doc));
  tx.commit();
}

fs::path require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("missing ") + what);
  return p;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

// Applies --config on top of the flag values. Relative paths in the file are
// taken relative to the file's directory.
RunConfig with_config(RunConfig flags, const fs::path& config_path) {
  if (config_path.empty()) return flags;
  const json j = read_json(config_path);
  RunConfig merged = run_config_from_json(j, flags);
  if (j.contains("paths")) {
    const fs::path base = config_path.parent_path();
    const auto& p = j.at("paths");
    auto fix = [&](const char* key, fs::path& dst) {
      if (p.contains(key)) dst = resolve(dst, base);
    };
    fix("names", merged.paths.names);
    fix("templates", merged.paths.templates);
    fix("people", merged.paths.people);
    fix("corpus", merged.paths.corpus);
    fix("wiki", merged.paths.wiki);
    fix("manifests", merged.paths.manifests);
  }
  return merged;
}

bool config_has(const fs::path& config_path, const char* key) {
  return !config_path.empty() && read_json(config_path).contains(key);
}

fs::path test_file(const fs::path& p) { return fs::is_directory(p) ? p / "test.jsonl" : p; }

std::vector<Sample> load_samples(const fs::path& corpus, const char* file) {
  return read_samples(corpus / file);
}

struct GenPeople {
  RunConfig cfg;
  fs::path config;
  bool sizes_set = false;
};

int gen_people(GenPeople o, std::ostream& out) {
  RunConfig c = with_config(o.cfg, o.config);
  if (!o.sizes_set && !config_has(o.config, "pool_sizes")) {
    const int third = c.population / 3;
    c.pool_sizes = {third, third, c.population - 2 * third};
  }
  const fs::path names = c.paths.names.empty() ? default_data_dir() / "names" : c.paths.names;
  const fs::path dir = require_path(c.paths.people, "--out");
  const auto persons = generate_population(c.seed, c.population, load_name_pools(names));
  const auto pools = split_pools(c.seed, persons, c.pool_sizes);
  OutputTransaction tx;
  tx.write(dir / "people.jsonl", people_jsonl(persons));
  tx.write(dir / "pools.json", dump_pretty(to_json(pools)));
  tx.commit();
  out << "wrote " << persons.size() << " persons to " << dir.string() << "\n";
  return kOk;
}

std::vector<int> parse_counts(const std::string& text) {
  std::vector<int> counts;
  std::size_t i = 0;
  while (i <= text.size()) {
    const auto j = std::min(text.find(',', i), text.size());
    const std::string part = text.substr(i, j - i);
    try {
      std::size_t used = 0;
      counts.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad count list '" + text + "'");
    }
    i = j + 1;
  }
  return counts;
}

struct BuildCorpus {
  RunConfig cfg;
  fs::path config;
  bool seed_set = false;
  std::string test_counts;
};

int build_corpus_cmd(BuildCorpus o, std::ostream& out, std::ostream& err) {
  if (!o.test_counts.empty()) o.cfg.schedule.test_subgroup_counts = parse_counts(o.test_counts);
  const bool seed_set = o.seed_set || config_has(o.config, "seed");
  RunConfig c = with_config(o.cfg, o.config);
  const fs::path people_dir = require_path(c.paths.people, "--people-dir");
  const fs::path out_dir = require_path(c.paths.corpus, "--out");
  const fs::path templates =
      c.paths.templates.empty() ? default_data_dir() / "templates" : c.paths.templates;

  const auto persons = read_people(people_dir / "people.jsonl");
  const auto pools = pools_from_json(read_json(people_dir / "pools.json"));
  CorpusConfig cc;
  cc.seed = seed_set ? c.seed : pools.seed;
  cc.schedule = c.schedule;
  cc.params.anniversary_years = c.anniversary_years;
  Corpus corpus = build_corpus(persons, pools, load_template_pack(templates), cc);
  if (!c.paths.wiki.empty()) {
    auto wiki = ingest_wiki(c.paths.wiki, c.wiki_per_subset, cc.seed);
    emit_warnings(wiki.warnings, err);
    std::set<std::string> ids;
    for (const auto& s : corpus.test) ids.insert(s.id);
    for (auto& s : wiki.samples)
      if (ids.insert(s.id).second) corpus.test.push_back(std::move(s));
  }
  const std::size_t n_cpt = corpus.cpt.size(), n_sft = corpus.sft.size(),
                    n_test = corpus.test.size();
  OutputTransaction tx;
  tx.write(out_dir / "cpt.jsonl", samples_jsonl(std::move(corpus.cpt)));
  tx.write(out_dir / "sft.jsonl", samples_jsonl(std::move(corpus.sft)));
  tx.write(out_dir / "test.jsonl", samples_jsonl(std::move(corpus.test)));
  tx.write(out_dir / "splits.json", dump_pretty(to_json(corpus.split)));
  tx.commit();
  out << "wrote " << n_cpt << " cpt, " << n_sft << " sft, " << n_test << " test samples to "
      << out_dir.string() << "\n";
  return kOk;
}

struct IngestWiki {
  RunConfig cfg;
  fs::path config;
  fs::path out;
};

int ingest_wiki_cmd(const IngestWiki& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = with_config(o.cfg, o.config);
  const fs::path input = require_path(c.paths.wiki, "--input");
  if (o.out.empty() == c.paths.corpus.empty())
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --out and --corpus");
  auto wiki = ingest_wiki(input, c.wiki_per_subset, c.seed);
  emit_warnings(wiki.warnings, err);
  const std::size_t n = wiki.samples.size();
  OutputTransaction tx;
  if (!o.out.empty()) {
    tx.write(o.out, samples_jsonl(std::move(wiki.samples)));
  } else {
    const fs::path test = c.paths.corpus / "test.jsonl";
    std::vector<Sample> merged;
    std::set<std::string> ids;
    for (auto& s : read_samples(test))
      if (s.knowledge_class != KnowledgeClass::kExternal) {
        ids.insert(s.id);
        merged.push_back(std::move(s));
      }
    for (auto& s : wiki.samples)
      if (ids.insert(s.id).second) merged.push_back(std::move(s));
    tx.write(test, samples_jsonl(std::move(merged)));
  }
  tx.commit();
  out << "ingested " << n << " wiki samples\n";
  return kOk;
}

ExperimentData load_experiment(const fs::path& corpus, Experiment e) {
  const auto sft = load_samples(corpus, "sft.jsonl");
  const auto split = reasoning_split_from_json(read_json(corpus / "splits.json"));
  return experiment_data(sft, split, e);
}

struct ScheduleOpts {
  RunConfig cfg;
  fs::path config;
  fs::path variant;
  fs::path out;
};

int schedule_cmd(const ScheduleOpts& o, std::ostream& out) {
  const RunConfig c = with_config(o.cfg, o.config);
  const fs::path corpus = require_path(c.paths.corpus, "--corpus");
  std::vector<VariantSpec> specs;
  if (!o.variant.empty()) {
    specs.push_back(variant_from_json(read_json(o.variant)));
  } else {
    specs = c.variants;
  }
  if (specs.empty()) throw Error(ErrorCode::kInvalidArgument, "no variant given");

  std::map<Experiment, ExperimentData> data;
  for (const auto& s : specs)
    if (!data.contains(s.experiment)) data.emplace(s.experiment, load_experiment(corpus, s.experiment));

  std::vector<Manifest> manifests(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    manifests[i] = build_manifest(specs[i], data.at(specs[i].experiment));
  });

  OutputTransaction tx;
  if (!o.variant.empty()) {
    tx.write(require_path(o.out, "--out"), dump_compact(to_json(manifests[0])) + "\n");
  } else {
    const fs::path dir = !o.out.empty() ? o.out : require_path(c.paths.manifests, "--out");
    for (const auto& m : manifests)
      tx.write(dir / (m.variant.name + ".json"), dump_compact(to_json(m)) + "\n");
  }
  tx.commit();
  for (const auto& m : manifests)
    out << m.variant.name << ": " << m.entries.size() << " entries, budget " << m.budget << "\n";
  return kOk;
}

struct ScoreOpts {
  fs::path test;
  fs::path pred;
  fs::path variant;
  std::string id;
  fs::path out;
};

int score_cmd(const ScoreOpts& o, std::ostream& out, std::ostream& err) {
  const auto tests = read_samples(test_file(o.test));
  const auto preds = read_predictions(o.pred);
  std::optional<VariantSpec> variant;
  if (!o.variant.empty()) variant = variant_from_json(read_json(o.variant));
  std::string id = o.id;
  if (id.empty()) id = variant ? variant->name : o.pred.stem().string();
  auto result = score_predictions(tests, preds, id);
  result.report.variant = variant;
  emit_warnings(result.warnings, err);
  deliver(to_json(result.report), o.out, out);
  return kOk;
}

struct CategorizeOpts {
  fs::path corpus;
  fs::path targets;
  fs::path pred;
  fs::path out;
  bool emit = false;
  int k = kFewShotK;
  int trials = kFewShotTrials;
  std::uint64_t seed = 0;
};

int categorize_cmd(const CategorizeOpts& o, std::ostream& out, std::ostream& err) {
  const fs::path targets_path = o.targets.empty() ? o.corpus / "test.jsonl" : o.targets;
  std::vector<Sample> targets;
  for (auto& s : read_samples(targets_path))
    if (s.task_kind == TaskKind::kQa) targets.push_back(std::move(s));

  if (o.emit) {
    const auto pool = load_samples(o.corpus, "sft.jsonl");
    std::vector<std::vector<std::string>> prompts(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
      prompts[i] = build_fewshot_prompts(targets[i], pool, o.k, o.trials, o.seed);
    });
    std::string body;
    for (std::size_t i = 0; i < targets.size(); ++i)
      for (std::size_t t = 0; t < prompts[i].size(); ++t)
        body += dump_compact({{"id", targets[i].id + "#" + std::to_string(t)},
                              {"sample_id", targets[i].id},
                              {"trial", t},
                              {"prompt", prompts[i][t]}}) +
                "\n";
    OutputTransaction tx;
    tx.write(require_path(o.out, "--out"), body);
    tx.commit();
    out << "wrote " << targets.size() * static_cast<std::size_t>(o.trials) << " prompts\n";
    return kOk;
  }

  std::map<std::string, const Sample*> by_id;
  for (const auto& s : targets) by_id.emplace(s.id, &s);
  std::map<std::string, std::map<int, bool>> trials;
  for (const auto& p : read_predictions(require_path(o.pred, "--pred"))) {
    const auto hash = p.sample_id.rfind('#');
    if (hash == std::string::npos)
      throw Error(ErrorCode::kFormat, "categorize predictions use ids like <sample_id>#<trial>");
    const std::string sid = p.sample_id.substr(0, hash);
    const auto it = by_id.find(sid);
    if (it == by_id.end()) throw Error(ErrorCode::kUnknownId, "unknown target " + sid);
    int trial = 0;
    try {
      trial = std::stoi(p.sample_id.substr(hash + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kFormat, "bad trial index in " + p.sample_id);
    }
    if (!trials[sid]
             .emplace(trial, exact_match(parse_final_answer(p.output, TaskKind::kQa),
                                         it->second->answer) == 1)
             .second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate prediction " + p.sample_id);
  }
  json rows = json::array();
  std::size_t known = 0;
  for (const auto& [sid, t] : trials) {
    if (t.size() != static_cast<std::size_t>(kFewShotTrials))
      throw Error(ErrorCode::kArity, "target " + sid + " has " + std::to_string(t.size()) +
                                         " trials, expected " + std::to_string(kFewShotTrials));
    std::array<bool, kFewShotTrials> outcomes{};
    std::size_t i = 0, correct = 0;
    for (const auto& [idx, ok] : t) {
      outcomes[i++] = ok;
      correct += ok ? 1 : 0;
    }
    const Knowledge k = categorize_knowledge(outcomes);
    if (k == Knowledge::kKnown) ++known;
    rows.push_back({{"sample_id", sid},
                    {"correct_trials", correct},
                    {"category", std::string(to_string(k))}});
  }
  if (trials.size() < targets.size())
    emit_warnings({{"missing_predictions", std::to_string(targets.size() - trials.size()) +
                                               " targets have no predictions"}},
                  err);
  deliver({{"known", known}, {"unknown", trials.size() - known}, {"categories", std::move(rows)}},
          o.out, out);
  return kOk;
}

struct ReportOpts {
  fs::path baseline;
  std::vector<std::string> variants;
  std::string grouping = "qa";
  fs::path out;
};

int report_cmd(const ReportOpts& o, std::ostream& out, std::ostream& err) {
  const Grouping g = grouping_from_string(o.grouping);
  const auto base = score_report_from_json(read_json(o.baseline));
  std::vector<ScoreReport> variants;
  for (const auto& v : o.variants) variants.push_back(score_report_from_json(read_json(v)));
  const auto report = aggregate_report(base, variants, g);
  emit_warnings(report.warnings, err);
  if (o.out.empty()) {
    out << dump_pretty(to_json(report));
    return kOk;
  }
  OutputTransaction tx;
  tx.write(o.out / "report.json", dump_pretty(to_json(report)));
  tx.write(o.out / "report.csv", report_csv(report));
  tx.commit();
  for (const auto& [group, s] : report.groups)
    out << to_string(group) << " " << s.mean_delta_pct << " +- " << s.stderr_pct << " (n=" << s.n
        << ")\n";
  return kOk;
}

struct AttnOpts {
  fs::path dump;
  fs::path base;
  fs::path variant;
  std::string window = "12:24";
  double threshold = 0.5;
  fs::path out;
};

int attn_score_cmd(const AttnOpts& o, std::ostream& out) {
  const auto dump = read_attdump(o.dump);
  const auto w = parse_window(o.window);
  json scores = json::object();
  double sum = 0.0;
  for (const auto& inst : dump.instances) {
    const double s = entity_attention(dump, inst.sample_id, w);
    scores[inst.sample_id] = s;
    sum += s;
  }
  const double mean = dump.instances.empty() ? 0.0 : sum / static_cast<double>(dump.instances.size());
  deliver({{"window", {w.lo, w.hi}}, {"mean", mean}, {"instances", std::move(scores)}}, o.out, out);
  return kOk;
}

int attn_profile_cmd(const AttnOpts& o, std::ostream& out) {
  const auto dump = read_attdump(o.dump);
  const auto profile = layer_profile(dump);
  json layers = json::array();
  std::vector<double> means;
  for (const auto& l : profile) {
    layers.push_back({{"mean", l.mean}, {"std", l.std}});
    means.push_back(l.mean);
  }
  const auto w = select_window(means, o.threshold);
  deliver({{"layers", std::move(layers)}, {"threshold", o.threshold}, {"selected_window", {w.lo, w.hi}}},
          o.out, out);
  return kOk;
}

int attn_delta_cmd(const AttnOpts& o, std::ostream& out) {
  const auto w = parse_window(o.window);
  const double pct =
      relative_attention_change(read_attdump(o.variant), read_attdump(o.base), w);
  deliver({{"window", {w.lo, w.hi}}, {"relative_change_pct", pct}}, o.out, out);
  return kOk;
}

struct SimilarityOpts {
  fs::path corpus;
  std::string anchor = "all";
  std::string format = "chat";
  fs::path out;
};

int similarity_cmd(const SimilarityOpts& o, std::ostream& out, std::ostream& err) {
  PromptFormat format;
  if (o.format == "plain") {
    format.chat = false;
  } else if (o.format != "chat") {
    throw Error(ErrorCode::kInvalidArgument, "format must be chat or plain");
  }
  const auto tests = read_samples(test_file(o.corpus));
  std::vector<TaskId> anchors;
  if (o.anchor == "all") {
    anchors = reasoning_tasks();
  } else {
    anchors.push_back(task_id_from_string(o.anchor));
  }
  Warnings warnings;
  json per_anchor = json::object();
  if (anchors.size() > 1)
    for (const auto& a : anchors)
      per_anchor[a.str()] = to_json(task_similarity(tests, a, format))["groups"];
  const auto mean = mean_task_similarity(tests, anchors, format, &warnings);
  emit_warnings(warnings, err);
  json doc = to_json(mean);
  doc["format"] = o.format;
  if (anchors.size() > 1) doc["per_anchor"] = std::move(per_anchor);
  deliver(doc, o.out, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biography-reasoning dataset, schedule and evaluation toolkit", "biopatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  GenPeople gp;
  auto* gen = app.add_subcommand("gen-people", "Generate persons and knowledge pools");
  gen->add_option("--seed", gp.cfg.seed, "Generation seed");
  gen->add_option("--n", gp.cfg.population, "Population size");
  gen->add_option("--names", gp.cfg.paths.names, "Name pool directory");
  auto* k_opt = gen->add_option("--known", gp.cfg.pool_sizes.known, "Known pool size");
  auto* t_opt = gen->add_option("--test", gp.cfg.pool_sizes.test, "Test pool size");
  auto* u_opt = gen->add_option("--unknown", gp.cfg.pool_sizes.unknown, "Unknown pool size");
  gen->add_option("--out", gp.cfg.paths.people, "Output directory");
  gen->add_option("--config", gp.config, "Run config (overrides flags)");

  BuildCorpus bc;
  auto* build = app.add_subcommand("build-corpus", "Render CPT, SFT and test samples");
  build->add_option("--people-dir", bc.cfg.paths.people, "Directory with people.jsonl and pools.json");
  build->add_option("--templates", bc.cfg.paths.templates, "Template pack directory");
  auto* seed_opt = build->add_option("--seed", bc.cfg.seed, "Corpus seed (default: pools seed)");
  build->add_option("--known-count", bc.cfg.schedule.known_count, "Rephrasings per known biography");
  build->add_option("--aux-count", bc.cfg.schedule.aux_count, "Rephrasings per auxiliary fact");
  build->add_option("--test-counts", bc.test_counts, "Comma-separated test subgroup counts");
  build->add_option("--anniversary", bc.cfg.anniversary_years, "Anniversary offset in years");
  build->add_option("--wiki", bc.cfg.paths.wiki, "Wiki-style JSONL to add to the test set");
  build->add_option("--per-subset", bc.cfg.wiki_per_subset, "Wiki questions per subset");
  build->add_option("--out", bc.cfg.paths.corpus, "Output corpus directory");
  build->add_option("--config", bc.config, "Run config (overrides flags)");

  IngestWiki iw;
  auto* ingest = app.add_subcommand("ingest-wiki", "Sample the wiki-style OOD test set");
  ingest->add_option("--input", iw.cfg.paths.wiki, "JSONL with question, answers, subset");
  ingest->add_option("--per-subset", iw.cfg.wiki_per_subset, "Questions per subset");
  ingest->add_option("--seed", iw.cfg.seed, "Sampling seed");
  ingest->add_option("--out", iw.out, "Write samples to this file");
  ingest->add_option("--corpus", iw.cfg.paths.corpus, "Merge into this corpus's test.jsonl");
  ingest->add_option("--config", iw.config, "Run config (overrides flags)");

  ScheduleOpts so;
  auto* sched = app.add_subcommand("schedule", "Build training manifests");
  sched->add_option("--variant", so.variant, "Variant spec JSON");
  sched->add_option("--corpus", so.cfg.paths.corpus, "Corpus directory");
  sched->add_option("--out", so.out, "Manifest path (or directory with --config variants)");
  sched->add_option("--config", so.config, "Run config (overrides flags)");

  ScoreOpts sc;
  auto* score = app.add_subcommand("score", "Exact-match scoring of predictions");
  score->add_option("--test", sc.test, "Corpus directory or test.jsonl")->required();
  score->add_option("--pred", sc.pred, "predictions.jsonl")->required();
  score->add_option("--variant", sc.variant, "Variant spec the predictions come from");
  score->add_option("--id", sc.id, "Report id");
  score->add_option("--out", sc.out, "Report path (default: stdout)");

  CategorizeOpts co;
  auto* categorize = app.add_subcommand("categorize", "Few-shot Known/Unknown categorization");
  categorize->add_option("--corpus", co.corpus, "Corpus directory")->required();
  categorize->add_option("--targets", co.targets, "Target samples (default: corpus test.jsonl)");
  categorize->add_flag("--emit-prompts", co.emit, "Write prompts instead of scoring");
  categorize->add_option("--pred", co.pred, "Predictions keyed <sample_id>#<trial>");
  categorize->add_option("--k", co.k, "Exemplars per prompt");
  categorize->add_option("--trials", co.trials, "Prompts per target");
  categorize->add_option("--seed", co.seed, "Exemplar seed");
  categorize->add_option("--out", co.out, "Output path");

  ReportOpts ro;
  auto* report = app.add_subcommand("report", "Grouped relative-change report");
  report->add_option("--baseline", ro.baseline, "Baseline score report")->required();
  report->add_option("--variants", ro.variants, "Variant score reports")->required();
  report->add_option("--grouping", ro.grouping, "qa, reasoning or patch");
  report->add_option("--out", ro.out, "Output directory for report.json and report.csv");

  AttnOpts ao;
  auto* attn = app.add_subcommand("attn", "Entity-attention analysis of .attdump directories");
  attn->require_subcommand(1);
  auto* a_score = attn->add_subcommand("score", "Per-instance entity attention");
  a_score->add_option("--dump", ao.dump, "Dump directory")->required();
  a_score->add_option("--window", ao.window, "Layer window LO:HI (inclusive)");
  a_score->add_option("--out", ao.out, "Output path");
  auto* a_profile = attn->add_subcommand("profile", "Per-layer profile and selected window");
  a_profile->add_option("--dump", ao.dump, "Dump directory")->required();
  a_profile->add_option("--threshold", ao.threshold, "Fraction of the peak layer mean");
  a_profile->add_option("--out", ao.out, "Output path");
  auto* a_delta = attn->add_subcommand("delta", "Relative change against a baseline dump");
  a_delta->add_option("--base", ao.base, "Baseline dump")->required();
  a_delta->add_option("--variant", ao.variant, "Variant dump")->required();
  a_delta->add_option("--window", ao.window, "Layer window LO:HI (inclusive)");
  a_delta->add_option("--out", ao.out, "Output path");

  SimilarityOpts sm;
  auto* sim = app.add_subcommand("similarity", "Context similarity of test groups");
  sim->add_option("--corpus", sm.corpus, "Corpus directory or test.jsonl")->required();
  sim->add_option("--anchor", sm.anchor, "Reasoning task (e.g. M_SR) or all");
  sim->add_option("--format", sm.format, "chat or plain");
  sim->add_option("--out", sm.out, "Output path");

  std::vector<std::string> argv_store{"biopatch"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    emit_error("usage", e.what(), err);
    return kValidation;
  }

  try {
    if (*gen) {
      gp.sizes_set = k_opt->count() + t_opt->count() + u_opt->count() > 0;
      return gen_people(gp, out);
    }
    if (*build) {
      bc.seed_set = seed_opt->count() > 0;
      return build_corpus_cmd(bc, out, err);
    }
    if (*ingest) return ingest_wiki_cmd(iw, out, err);
    if (*sched) return schedule_cmd(so, out);
    if (*score) return score_cmd(sc, out, err);
    if (*categorize) return categorize_cmd(co, out, err);
    if (*report) return report_cmd(ro, out, err);
    if (*a_score) return attn_score_cmd(ao, out);
    if (*a_profile) return attn_profile_cmd(ao, out);
    if (*a_delta) return attn_delta_cmd(ao, out);
    if (*sim) return similarity_cmd(sm, out, err);
  } catch (const Error& e) {
    emit_error(to_string(e.code()), e.what(), err);
    return e.code() == ErrorCode::kIo ? kIoFailure : kValidation;
  } catch (const fs::filesystem_error& e) {
    emit_error("io", e.what(), err);
    return kIoFailure;
  } catch (const json::exception& e) {
    emit_error("format", e.what(), err);
    return kValidation;
  }
  return kValidation;
}

}  // namespace cli

}  // namespace biopatch

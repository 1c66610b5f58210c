#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gvic/datastore.hpp"
#include "gvic/engine.hpp"
#include "gvic/evaluation.hpp"
#include "gvic/judge.hpp"
#include "gvic/report.hpp"
#include "gvic/topology.hpp"

namespace gvic {

struct JudgeConfig {
  std::string kind = "balance";  // balance | harmlessness | first | llm
  double alpha = 1.0;
  double beta = 1.0;
  double tie_band = 1e-9;
  std::string prompt;
  BackendConfig http;
};

inline void from_json(const nlohmann::json& j, JudgeConfig& c) {
  c.kind = j.value("kind", c.kind);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.tie_band = j.value("tie_band", c.tie_band);
  c.prompt = j.value("prompt", c.prompt);
  if (j.contains("http")) c.http = j.at("http").get<BackendConfig>();
}

inline std::unique_ptr<Judge> make_judge(const JudgeConfig& cfg) {
  if (cfg.kind == "balance")
    return std::make_unique<BalanceJudge>(cfg.alpha, cfg.beta, cfg.tie_band);
  if (cfg.kind == "harmlessness")
    return std::make_unique<HarmlessnessJudge>(cfg.tie_band);
  if (cfg.kind == "first") return std::make_unique<FirstPresentedJudge>();
  if (cfg.kind == "llm")
    return std::make_unique<LlmJudge>(std::make_shared<HttpBackend>(cfg.http),
                                      cfg.prompt);
  throw InvalidConfigError("unknown judge kind: " + cfg.kind);
}

/// One config document covers every module; flags override file values.
struct FullConfig {
  DebateConfig debate;
  JudgeConfig judge;
};

inline FullConfig load_config_file(const std::string& path) {
  FullConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InvalidConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidConfigError("config file " + path + ": " + e.what());
  }
  bool synthesis_given = j.contains("synthesis");
  cfg.debate = j.get<DebateConfig>();
  // Without an explicit choice, mocks get the verifiable argmax synthesis and
  // real backends get the aggregator (no scorer assumed).
  if (!synthesis_given && cfg.debate.backend_kind == "http")
    cfg.debate.synthesis = SynthesisMode::AggregatorAgent;
  if (j.contains("judge")) cfg.judge = j.at("judge").get<JudgeConfig>();
  return cfg;
}

namespace cli_detail {

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

inline int cmd_topo_verify(int n, int m, const std::string& kind_str,
                           bool emit_dot) {
  auto kind = topology_from_string(kind_str);
  std::cout << "config fingerprint: "
            << to_hex16(fnv1a64(kind_str + "/" + std::to_string(n) + "/" +
                                std::to_string(m)))
            << "\n";
  auto plan = build_plan(kind, n, m);
  auto report = analyze(plan);
  auto violations = verify_plan(plan);

  std::cout << "topology " << to_string(kind) << "  N=" << n << "  m="
            << plan.group_size << "  g=" << plan.gap << "\n";
  std::cout << "message count per round: " << report.message_count << "\n";
  std::cout << "components: " << report.components.size() << "\n";
  for (const auto& comp : report.components) {
    std::cout << "  {";
    for (size_t i = 0; i < comp.size(); ++i)
      std::cout << (i ? ", " : " ") << "A" << comp[i] + 1;
    std::cout << " }\n";
  }
  if (report.components.size() > 1)
    std::cout << "WARNING: DISCONNECTED reference graph; information cannot "
                 "cross the listed components in any number of rounds\n";
  if (report.rounds_to_full_propagation)
    std::cout << "rounds to full propagation: "
              << *report.rounds_to_full_propagation << "\n";
  else
    std::cout << "rounds to full propagation: unreachable\n";
  int min_dist = plan.n_agents;
  for (int d : report.min_peer_distance) min_dist = std::min(min_dist, d);
  std::cout << "minimum reference-set circular distance: " << min_dist << "\n";
  if (plan.degraded) {
    std::cout << "WARNING: degraded plan (wraparound collisions)\n";
    for (const auto& w : plan.warnings) std::cout << "  " << w << "\n";
  }
  if (kind != TopologyKind::FullyConnected && n >= 3) {
    auto eq = overhead_equivalence_check(n);
    std::cout << "overhead equivalence (interval m=3 vs neighbor): "
              << (eq.equivalent ? "holds" : "does not hold") << " ("
              << eq.interval_messages << " vs " << eq.neighbor_messages
              << ")\n";
  }
  if (emit_dot) std::cout << to_dot(plan);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "INVARIANT VIOLATION: " << v << "\n";
    return 1;
  }
  return 0;
}

inline int cmd_debate_run(const std::string& question_file,
                          const std::string& format_str, FullConfig cfg,
                          const std::string& out_dir, int sample_n,
                          std::uint64_t sample_seed, std::string run_id) {
  auto records = load_dataset(question_file,
                              dataset_format_from_string(format_str));
  if (sample_n > 0) records = sample_records(records, sample_n, sample_seed);

  const std::string fp = fingerprint(cfg.debate);
  std::cout << "config fingerprint: " << fp << "\n";

  if (run_id.empty()) run_id = "run-" + fp;
  auto run_dir = std::filesystem::path(out_dir) / run_id;

  RunManifest manifest;
  if (std::filesystem::exists(run_dir / "manifest.json")) {
    manifest = load_manifest(run_dir);
    auto pending = resume_pending(manifest, fp);  // throws on mismatch
    if (sample_n > 0 && manifest.sample_seed != sample_seed)
      throw FingerprintMismatchError(
          "run was sampled with seed " +
          std::to_string(manifest.sample_seed) + ", not " +
          std::to_string(sample_seed));
    std::cout << "resuming: " << pending.size() << " of "
              << manifest.sampled_ids.size() << " questions pending\n";
  } else {
    manifest.run_id = run_id;
    manifest.config_fingerprint = fp;
    manifest.dataset_name =
        std::filesystem::path(question_file).filename().string();
    manifest.sample_seed = sample_seed;
    manifest.sample_size = static_cast<int>(records.size());
    for (const auto& r : records) {
      manifest.sampled_ids.push_back(r.question_id);
      manifest.status[r.question_id] = "pending";
    }
    manifest.created_at = iso8601_utc_now();
    manifest.updated_at = manifest.created_at;
    save_manifest(manifest, run_dir);
  }

  std::map<std::string, const QuestionRecord*> by_id;
  for (const auto& r : records) by_id[r.question_id] = &r;

  auto backend = make_backend(cfg.debate);
  MockScorer mock_scorer;
  Scorer* scorer = cfg.debate.backend_kind == "mock"
                       ? static_cast<Scorer*>(&mock_scorer)
                       : nullptr;

  int failures = 0;
  for (const auto& qid : resume_pending(manifest, fp)) {
    auto it = by_id.find(qid);
    if (it == by_id.end()) {
      std::cerr << "question " << qid
                << " from the manifest is not in the dataset; skipping\n";
      ++failures;
      manifest.status[qid] = "failed";
      manifest.updated_at = iso8601_utc_now();
      save_manifest(manifest, run_dir);
      continue;
    }
    try {
      auto transcript =
          run_debate(it->second->text, qid, cfg.debate, *backend, scorer);
      persist_transcript(transcript, run_dir);
      manifest.status[qid] = "done";
    } catch (const AllAgentsFailed& e) {
      persist_transcript(e.transcript, run_dir);
      manifest.status[qid] = "failed";
      ++failures;
      std::cerr << "question " << qid << ": all agents failed\n";
    }
    manifest.updated_at = iso8601_utc_now();
    save_manifest(manifest, run_dir);
  }
  std::cout << "run " << run_id << " complete, transcripts in "
            << run_dir.string() << "\n";
  return failures == 0 ? 0 : 1;
}

struct LoadedRun {
  RunManifest manifest;
  std::vector<std::pair<std::string, std::string>> questions;  // id, text
  std::map<std::string, std::string> answers;
};

inline LoadedRun load_run(const std::filesystem::path& run_dir) {
  LoadedRun run;
  run.manifest = load_manifest(run_dir);
  for (const auto& qid : run.manifest.sampled_ids) {
    auto it = run.manifest.status.find(qid);
    if (it == run.manifest.status.end() || it->second != "done") continue;
    auto tr = load_transcript(transcript_path(run_dir, qid));
    run.questions.emplace_back(qid, tr.question);
    run.answers[qid] = tr.final_answer;
  }
  if (run.questions.empty())
    throw MissingRunError("run dir has no completed transcripts: " +
                          run_dir.string());
  return run;
}

inline int cmd_eval_pair(const std::string& dir_a, const std::string& dir_b,
                         const FullConfig& cfg, const std::string& out_csv) {
  auto run_a = load_run(dir_a);
  auto run_b = load_run(dir_b);
  std::cout << "config fingerprint: A=" << run_a.manifest.config_fingerprint
            << " B=" << run_b.manifest.config_fingerprint << "\n";
  auto judge = make_judge(cfg.judge);
  auto report =
      run_pairwise_eval(run_a.questions, run_a.answers, run_b.answers, *judge);
  report.fingerprint_a = run_a.manifest.config_fingerprint;
  report.fingerprint_b = run_b.manifest.config_fingerprint;

  std::string label = run_a.manifest.run_id + " vs " + run_b.manifest.run_id;
  std::vector<ReportRow> rows{make_row(label, report)};
  std::cout << render_table(rows);
  if (report.skipped > 0)
    std::cout << report.skipped << " questions skipped (judge failures)\n";

  if (!out_csv.empty()) {
    write_file(out_csv, render_verdict_csv(report.per_question));
    nlohmann::json summary{{"label", label},
                           {"wins", report.wins},
                           {"ties", report.ties},
                           {"losses", report.losses},
                           {"skipped", report.skipped},
                           {"d_wl", report.d_wl},
                           {"fingerprint_a", report.fingerprint_a},
                           {"fingerprint_b", report.fingerprint_b}};
    write_file(std::filesystem::path(out_csv).replace_extension(".json"),
               summary.dump(2) + "\n");
  }
  return 0;
}

inline int cmd_eval_ablation(const std::string& dataset,
                             const std::string& format_str, FullConfig cfg,
                             bool config_given, const std::string& seeds_str,
                             int sample_n, std::uint64_t sample_seed,
                             const std::string& out_csv) {
  if (!config_given) {
    // Bare invocation: the stress profile that makes the communication
    // structure observable at mock scale, judged on balance with a tie band.
    cfg.debate.mock = ablation_mock_profile();
    cfg.debate.synthesis = SynthesisMode::AggregatorAgent;
    cfg.judge.tie_band = 0.02;
  }
  auto records =
      load_dataset(dataset, dataset_format_from_string(format_str));
  if (sample_n > 0) records = sample_records(records, sample_n, sample_seed);
  std::vector<std::pair<std::string, std::string>> questions;
  for (const auto& r : records) questions.emplace_back(r.question_id, r.text);

  std::vector<std::uint64_t> seeds;
  std::string tok;
  std::istringstream seed_in(seeds_str);
  while (std::getline(seed_in, tok, ','))
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  if (seeds.empty()) seeds.push_back(cfg.debate.seed);

  std::cout << "config fingerprint: " << fingerprint(cfg.debate) << "\n";
  auto judge = make_judge(cfg.judge);
  auto grid = run_ablation_grid(questions, cfg.debate, *judge, seeds);
  auto rows = ablation_rows(grid);
  std::cout << render_table(rows);
  if (!out_csv.empty()) write_file(out_csv, render_csv(rows));
  return 0;
}

inline int cmd_report(const std::vector<std::string>& run_dirs,
                      const std::string& out_csv) {
  // Rows come from eval summaries (eval pair --out writes them next to the
  // CSV); ordering is stable by label.
  std::vector<ReportRow> rows;
  for (const auto& dir : run_dirs) {
    std::filesystem::path p(dir);
    if (std::filesystem::is_directory(p)) p /= "eval_report.json";
    std::ifstream in(p);
    if (!in) throw MissingRunError("no evaluation summary at " + p.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw MissingRunError("cannot parse " + p.string() + ": " + e.what());
    }
    EvalReport r;
    r.wins = j.at("wins").get<int>();
    r.ties = j.at("ties").get<int>();
    r.losses = j.at("losses").get<int>();
    r.d_wl = j.at("d_wl").get<double>();
    rows.push_back(make_row(j.at("label").get<std::string>(), r));
  }
  std::sort(rows.begin(), rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.label < b.label; });
  std::cout << render_table(rows);
  if (!out_csv.empty()) write_file(out_csv, render_csv(rows));
  return 0;
}

}  // namespace cli_detail

/// Dispatches one CLI invocation. Exit codes: 0 success, 1 invariant or
/// evaluation failure, 2 configuration/usage errors.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"Gradual-vigilance interval-communication debate harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  app.add_option("--config", config_path, "JSON config file covering all modules");
  auto* seed_opt = app.add_option("--seed", seed, "override the run seed");
  app.add_option("--out", out, "output file or directory");

  // topo
  auto* topo = app.add_subcommand("topo", "communication plan tools");
  topo->fallthrough();
  topo->require_subcommand(1);
  int topo_n = 5, topo_m = 3;
  std::string topo_kind = "ic";
  bool topo_dot = false;
  auto* verify = topo->add_subcommand("verify", "build, analyze and check a plan");
  verify->fallthrough();
  verify->add_option("--n", topo_n, "number of agents")->required();
  verify->add_option("--m", topo_m, "participants per communication");
  verify->add_option("--kind", topo_kind, "fc|nc|ic")->required();
  verify->add_flag("--dot", topo_dot, "also emit the DOT graph");
  auto* exp = topo->add_subcommand("export", "emit the reference graph");
  exp->fallthrough();
  exp->add_option("--n", topo_n, "number of agents")->required();
  exp->add_option("--m", topo_m, "participants per communication");
  exp->add_option("--kind", topo_kind, "fc|nc|ic")->required();
  bool exp_dot = true;
  exp->add_flag("--dot", exp_dot, "DOT format (default)");

  // debate
  auto* debate = app.add_subcommand("debate", "run debates");
  debate->fallthrough();
  debate->require_subcommand(1);
  auto* debate_run_cmd = debate->add_subcommand("run", "debate every question in a file");
  debate_run_cmd->fallthrough();
  std::string question_file, dataset_format = "jsonl", run_id;
  int sample_n = 0;
  std::uint64_t sample_seed = 17;
  std::string vigilance_flag;
  debate_run_cmd->add_option("--question-file", question_file)->required();
  debate_run_cmd->add_option("--format", dataset_format, "jsonl|lines|hh");
  debate_run_cmd->add_option("--sample", sample_n, "sample size (0 = all)");
  debate_run_cmd->add_option("--sample-seed", sample_seed);
  debate_run_cmd->add_option("--run-id", run_id);
  debate_run_cmd->add_option("--vigilance", vigilance_flag, "on|off");

  // eval
  auto* eval = app.add_subcommand("eval", "pairwise evaluation");
  eval->fallthrough();
  eval->require_subcommand(1);
  auto* pair_cmd = eval->add_subcommand("pair", "judge two completed runs");
  pair_cmd->fallthrough();
  std::string dir_a, dir_b, judge_config;
  pair_cmd->add_option("--a", dir_a, "run directory of system A")->required();
  pair_cmd->add_option("--b", dir_b, "run directory of system B")->required();
  pair_cmd->add_option("--judge", judge_config, "judge config file");
  auto* ablation_cmd = eval->add_subcommand("ablation", "six-cell GV x topology grid");
  ablation_cmd->fallthrough();
  std::string ablation_dataset, seeds_str = "1,2,3,4,5";
  ablation_cmd->add_option("--dataset", ablation_dataset)->required();
  ablation_cmd->add_option("--format", dataset_format, "jsonl|lines|hh");
  ablation_cmd->add_option("--seeds", seeds_str, "comma separated mock seeds");
  ablation_cmd->add_option("--sample", sample_n, "sample size (0 = all)");
  ablation_cmd->add_option("--sample-seed", sample_seed);

  // report
  auto* report_cmd = app.add_subcommand("report", "combine evaluation summaries");
  report_cmd->fallthrough();
  std::vector<std::string> run_dirs;
  report_cmd->add_option("--run", run_dirs, "run directory or summary file")
      ->required()
      ->expected(-1);

  try {
    std::vector<const char*> argv;
    argv.push_back("gvic");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    seed_given = seed_opt->count() > 0;

    FullConfig cfg = load_config_file(config_path);
    if (seed_given) cfg.debate.seed = seed;
    if (!vigilance_flag.empty()) {
      if (vigilance_flag != "on" && vigilance_flag != "off")
        throw InvalidConfigError("--vigilance expects on|off");
      cfg.debate.vigilance_enabled = vigilance_flag == "on";
    }

    if (verify->parsed()) return cli_detail::cmd_topo_verify(topo_n, topo_m, topo_kind, topo_dot);
    if (exp->parsed()) {
      auto plan = build_plan(topology_from_string(topo_kind), topo_n, topo_m);
      if (out.empty())
        std::cout << to_dot(plan);
      else
        cli_detail::write_file(out, to_dot(plan));
      return 0;
    }
    if (debate_run_cmd->parsed()) {
      // Without --out, runs land under the data root (GVIC_DATA_ROOT).
      std::string out_dir =
          out.empty() ? (data_root() / "runs").string() : out;
      return cli_detail::cmd_debate_run(question_file, dataset_format, cfg,
                                        out_dir, sample_n, sample_seed, run_id);
    }
    if (pair_cmd->parsed()) {
      if (!judge_config.empty()) {
        std::ifstream in(judge_config);
        if (!in) throw InvalidConfigError("cannot open judge config: " + judge_config);
        nlohmann::json j;
        in >> j;
        cfg.judge = j.get<JudgeConfig>();
      }
      return cli_detail::cmd_eval_pair(dir_a, dir_b, cfg,
                                       out.empty() ? "report.csv" : out);
    }
    if (ablation_cmd->parsed())
      return cli_detail::cmd_eval_ablation(ablation_dataset, dataset_format,
                                           cfg, !config_path.empty(),
                                           seeds_str, sample_n, sample_seed,
                                           out);
    if (report_cmd->parsed()) return cli_detail::cmd_report(run_dirs, out);
    return 2;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  } catch (const InvalidConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidTemplateError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FingerprintMismatchError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gvic

// similo: rank, rerank and evaluate web element localization from the
// command line.
//
// Exit codes: 0 success / located, 1 not located, 2 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "similo/backend.hpp"
#include "similo/corpus.hpp"
#include "similo/error.hpp"
#include "similo/harness.hpp"
#include "similo/pipeline.hpp"
#include "similo/prompt.hpp"
#include "similo/report.hpp"
#include "similo/scoring.hpp"
#include "similo/von.hpp"

namespace {

using namespace similo;

constexpr int kExitOk = 0;
constexpr int kExitNotLocated = 1;
constexpr int kExitError = 2;

struct CommonArgs {
  std::string config_path;
  int top_k = 0;  // 0: take from config
  double threshold = kDefaultVonThreshold;
};

struct InputArgs {
  std::string snapshot_path;
  std::string target_path;
  std::string pair_id;
  bool ranked = false;
  std::string oracle;
};

struct LlmArgs {
  std::string spec;
  std::string mode = "motivate";
  int shots = 1;
  std::string record_dir;
  std::string model{kDefaultModel};
  std::string endpoint{kDefaultEndpoint};
  int max_prompt_tokens = kDefaultMaxPromptTokens;
};

ScoringConfig load_config(const CommonArgs& args) {
  ScoringConfig config =
      args.config_path.empty() ? ScoringConfig::defaults() : load_scoring_config(args.config_path);
  if (args.top_k > 0) config.top_k = args.top_k;
  validate(config);
  return config;
}

std::vector<std::string> read_element_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

// A target plus its ranked candidate list, from either raw node files or
// pre-merged, pre-ranked element lines.
struct Problem {
  TargetSpec target;
  std::vector<ScoredCandidate> ranked;
  bool has_oracle = true;
};

Problem load_problem(const InputArgs& in, const ScoringConfig& config, double threshold) {
  Problem p;
  if (in.ranked) {
    const auto desired = read_element_lines(in.target_path);
    if (desired.empty()) throw Error(ErrorCode::kParseError, in.target_path + " has no element line");
    p.target.desired = parse_element(desired.front());
    p.target.oracle_xpath = in.oracle;
    p.has_oracle = !in.oracle.empty();
    const auto lines = read_element_lines(in.snapshot_path);
    if (lines.empty()) throw Error(ErrorCode::kEmptySnapshot, in.snapshot_path + " has no candidates");
    int rank = 1;
    for (const auto& line : lines) {
      auto element = parse_element(line);
      const double score = similarity_score(p.target, element, config);
      p.ranked.push_back({std::move(element), score, rank++});
    }
    return p;
  }
  const auto snapshot = load_snapshot(in.snapshot_path);
  if (snapshot.empty()) throw Error(ErrorCode::kEmptySnapshot, in.snapshot_path + " has no records");
  const auto blocks = load_targets(in.target_path);
  if (blocks.empty()) throw Error(ErrorCode::kParseError, in.target_path + " has no pair");
  const TargetBlock* block = &blocks.front();
  if (!in.pair_id.empty()) {
    block = nullptr;
    for (const auto& b : blocks) {
      if (b.pair_id == in.pair_id) block = &b;
    }
    if (block == nullptr) throw Error(ErrorCode::kParseError, "no pair \"" + in.pair_id + "\"");
  }
  p.target = apply_von_to_target(block->nodes, block->target_xpath, block->oracle_xpath, threshold);
  if (!in.oracle.empty()) p.target.oracle_xpath = in.oracle;
  p.ranked = rank_candidates(p.target, merge_records(snapshot, threshold), config);
  return p;
}

PromptMode parse_mode(const LlmArgs& args) {
  const PromptTemplate kind =
      args.mode == "id" ? PromptTemplate::kIdOnly : PromptTemplate::kWithMotivations;
  return args.shots == 1 ? PromptMode::one_shot(kind) : PromptMode::zero_shot(kind);
}

// Owns the selected backend and whatever it depends on.
class BackendHandle {
 public:
  explicit BackendHandle(const LlmArgs& args) {
    const std::string& spec = args.spec;
    if (spec == "live") {
      LiveOptions options;
      options.api_key = api_key_from_env();
      options.model = args.model;
      options.endpoint = args.endpoint;
      options.policy.max_prompt_tokens = args.max_prompt_tokens;
      clock_ = std::make_unique<SystemClock>();
      base_ = std::make_unique<LiveBackend>(options, make_http_transport(), *clock_);
      metadata_ = {{"model", options.model}, {"endpoint", options.endpoint},
                   {"temperature", options.temperature}};
    } else if (spec.rfind("replay:", 0) == 0) {
      base_ = std::make_unique<ReplayBackend>(TranscriptStore(spec.substr(7)));
    } else if (spec == "scripted:rank1") {
      base_ = std::make_unique<ScriptedBackend>(scripted_rank1());
    } else if (spec == "scripted:oracle") {
      base_ = std::make_unique<ScriptedBackend>(scripted_oracle());
    } else {
      throw Error(ErrorCode::kConfigError, "unknown --llm \"" + spec +
                                               "\" (live, replay:DIR, scripted:rank1, "
                                               "scripted:oracle)");
    }
    if (!args.record_dir.empty()) {
      recorder_ = std::make_unique<RecordingBackend>(*base_, TranscriptStore(args.record_dir));
    }
    metadata_["backend"] = get().describe();
    // Live requests always go out at the most deterministic setting.
    if (!metadata_.contains("temperature")) metadata_["temperature"] = LiveOptions{}.temperature;
  }

  Backend& get() { return recorder_ ? *recorder_ : *base_; }
  const nlohmann::json& metadata() const { return metadata_; }

 private:
  std::unique_ptr<Clock> clock_;
  std::unique_ptr<Backend> base_;
  std::unique_ptr<Backend> recorder_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

std::string xpaths_of(const VisualElement& e) {
  std::string out;
  for (const auto& x : e.member_xpaths) {
    if (!out.empty()) out += " || ";
    out += x;
  }
  return out;
}

int cmd_rank(const InputArgs& in, const CommonArgs& common) {
  const auto config = load_config(common);
  const auto problem = load_problem(in, config, common.threshold);
  const auto top = take_top(problem.ranked, config.top_k);
  std::cout << "rank\twidget_id\tscore\txpath\n";
  for (const auto& c : top) {
    std::ostringstream score;
    score.setf(std::ios::fixed);
    score.precision(4);
    score << c.score;
    std::cout << c.rank << '\t' << c.element.widget_id << '\t' << score.str() << '\t'
              << xpaths_of(c.element) << '\n';
  }
  return kExitOk;
}

int cmd_prompt(const InputArgs& in, const CommonArgs& common, const LlmArgs& llm) {
  const auto config = load_config(common);
  const auto problem = load_problem(in, config, common.threshold);
  const auto top = take_top(problem.ranked, config.top_k);
  try {
    const auto bundle = build_prompt(problem.target, top, parse_mode(llm), llm.max_prompt_tokens);
    std::cout << bundle.rendered_text;
    std::cerr << "estimated tokens: " << bundle.estimated_tokens << '\n';
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPromptTooLarge) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitError;
    }
    throw;
  }
  return kExitOk;
}

int cmd_locate(const InputArgs& in, const CommonArgs& common, const LlmArgs& llm) {
  const auto config = load_config(common);
  const auto problem = load_problem(in, config, common.threshold);

  LocalizationOutcome outcome;
  std::string backend_name = "none";
  if (llm.spec.empty() || llm.spec == "none") {
    const auto start = std::chrono::steady_clock::now();
    outcome.method = Method::kVonSimilo;
    outcome.chosen = problem.ranked.front().element;
    outcome.chosen_rank = 1;
    outcome.located = check_oracle(outcome.chosen, problem.target.oracle_xpath);
    outcome.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } else {
    BackendHandle backend(llm);
    backend_name = backend.get().describe();
    LocateOptions options;
    options.von_threshold = common.threshold;
    options.max_prompt_tokens = llm.max_prompt_tokens;
    outcome = rerank_ranked(problem.target, problem.ranked, config.top_k, parse_mode(llm),
                            backend.get(), options);
  }

  std::cout << "method: " << method_name(outcome.method) << '\n';
  std::cout << "backend: " << backend_name << '\n';
  std::cout << "chosen widget_id: " << outcome.chosen.widget_id << '\n';
  std::cout << "chosen rank: " << outcome.chosen_rank << '\n';
  std::cout << "chosen xpath: " << xpaths_of(outcome.chosen) << '\n';
  if (problem.has_oracle) std::cout << "located: " << (outcome.located ? "yes" : "no") << '\n';
  std::cout << "fallback: " << (outcome.fallback_used ? "yes (" + outcome.llm_error + ")" : "no")
            << '\n';
  std::cout << "elapsed ms: " << outcome.elapsed_ms << '\n';
  if (outcome.llm_answer && !outcome.llm_answer->motivations.empty()) {
    std::cout << "motivations:\n";
    const auto& m = outcome.llm_answer->motivations;
    for (std::size_t i = 0; i < m.size(); ++i) std::cout << "  " << i + 1 << ". " << m[i] << '\n';
  }
  if (!problem.has_oracle) return kExitOk;
  return outcome.located ? kExitOk : kExitNotLocated;
}

std::set<int> parse_phases(const std::string& text) {
  std::set<int> phases;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "1" || item == "2" || item == "3") {
      phases.insert(item[0] - '0');
    } else {
      throw Error(ErrorCode::kConfigError, "--phases takes a list of 1, 2 and 3");
    }
  }
  if (phases.empty()) throw Error(ErrorCode::kConfigError, "--phases is empty");
  return phases;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path.string());
}

nlohmann::json phase_timing(const std::vector<LocalizationOutcome>& outcomes) {
  double merge = 0, rank = 0, backend = 0, total = 0;
  for (const auto& o : outcomes) {
    merge += o.merge_ms;
    rank += o.rank_ms;
    backend += o.backend_ms;
    total += o.elapsed_ms;
  }
  return {{"entries", outcomes.size()}, {"merge_ms_total", merge}, {"rank_ms_total", rank},
          {"backend_ms_total", backend}, {"elapsed_ms_total", total}};
}

int cmd_evaluate(const std::string& corpus_path, const std::string& phases_text,
                 const std::string& report_dir, const std::string& annotations, int jobs,
                 double price, const CommonArgs& common, const LlmArgs& llm) {
  const auto phases = parse_phases(phases_text);
  if (phases.count(2) && !phases.count(1)) {
    throw Error(ErrorCode::kMissingPhase1Results, "phase 2 needs phase 1 in the same run");
  }
  HarnessOptions options;
  options.config = load_config(common);
  options.locate.von_threshold = common.threshold;
  options.locate.max_prompt_tokens = llm.max_prompt_tokens;
  options.one_shot = llm.shots == 1;
  options.jobs = jobs;

  const auto corpus = load_corpus(corpus_path, common.threshold);
  std::unique_ptr<BackendHandle> backend;
  if (phases.count(2) || phases.count(3)) {
    if (llm.spec.empty()) throw Error(ErrorCode::kConfigError, "phases 2 and 3 need --llm");
    backend = std::make_unique<BackendHandle>(llm);
  }

  const std::filesystem::path dir(report_dir);
  std::filesystem::create_directories(dir);
  SummaryInput summary;
  nlohmann::json metadata = {
      {"corpus", corpus_path},
      {"entries", corpus.size()},
      {"phases", std::vector<int>(phases.begin(), phases.end())},
      {"von_threshold", common.threshold},
      {"top_k", options.config.top_k},
      {"shots", llm.shots},
      {"jobs", jobs},
      {"price_per_1k_tokens", price},
      {"timing_std", "population"},
      {"scoring_config", nlohmann::json::parse(to_json(options.config))},
  };
  if (backend) metadata["llm"] = backend->metadata();

  std::vector<LocalizationOutcome> p1;
  std::vector<LocalizationOutcome> p3;
  if (phases.count(1)) {
    p1 = run_phase(corpus, 1, options);
    write_text(dir / "phase1.csv", outcomes_csv(p1, corpus));
    summary.phase1 = summarize(p1, std::string(method_name(Method::kVonSimilo)), price);
    metadata["timing"]["phase1"] = phase_timing(p1);
    std::cout << "phase 1: " << summary.phase1->located << " located, "
              << summary.phase1->not_located << " not located of " << summary.phase1->total
              << " (" << summary.phase1->pct_located << "%)\n";
  }
  if (phases.count(2)) {
    const auto p2 = run_phase(corpus, 2, options, &backend->get(), &p1);
    write_text(dir / "phase2.csv", outcomes_csv(p2, corpus));
    write_text(dir / "motivations.csv", motivations_csv(p2));
    summary.phase2 = summarize(p2, std::string(method_name(Method::kVonSimiloLlm)), price);
    for (const auto& o : p2) {
      if (o.llm_answer) summary.phase2_motivations += static_cast<int>(o.llm_answer->motivations.size());
    }
    metadata["timing"]["phase2"] = phase_timing(p2);
    std::cout << "phase 2: " << summary.phase2->located << " of " << summary.phase2->total
              << " phase-1 failures located, " << summary.phase2_motivations << " motivations\n";
  }
  if (phases.count(3)) {
    p3 = run_phase(corpus, 3, options, &backend->get());
    write_text(dir / "phase3.csv", outcomes_csv(p3, corpus));
    summary.phase3 = summarize(p3, std::string(method_name(Method::kVonSimiloLlm)), price);
    metadata["timing"]["phase3"] = phase_timing(p3);
    std::cout << "phase 3: " << summary.phase3->located << " located, "
              << summary.phase3->not_located << " not located of " << summary.phase3->total
              << " (" << summary.phase3->pct_located << "%), estimated cost $"
              << summary.phase3->cost_usd << '\n';
  }
  if (phases.count(1) && phases.count(3)) {
    summary.comparison = compute_report(p1, p3, price);
    const auto& v = summary.comparison->venn;
    std::cout << "venn: both " << v.both << ", only phase 1 " << v.only_a << ", only phase 3 "
              << v.only_b << ", neither " << v.neither << "; not-located reduction "
              << summary.comparison->not_located_reduction_pct << "%\n";
  }
  if (!annotations.empty()) {
    const auto records = load_annotations(annotations);
    summary.categories = aggregate_motivations(records);
  }
  write_text(dir / "summary.md", summary_markdown(summary));
  write_text(dir / "metadata.json", metadata.dump(2) + "\n");
  return kExitOk;
}

void add_input_args(CLI::App* cmd, InputArgs& in) {
  cmd->add_option("snapshot", in.snapshot_path, "new_snapshot.jsonl (or element lines with --ranked)")
      ->required();
  cmd->add_option("target", in.target_path, "old_target.jsonl (or one element line with --ranked)")
      ->required();
  cmd->add_option("--pair", in.pair_id, "pair id inside the target file (default: first)");
  cmd->add_flag("--ranked", in.ranked,
                "inputs are pre-merged element lines; the snapshot file is already in rank order");
  cmd->add_option("--oracle", in.oracle, "oracle xpath (overrides the target file)");
}

void add_common_args(CLI::App* cmd, CommonArgs& common) {
  cmd->add_option("--config", common.config_path, "scoring config JSON");
  cmd->add_option("--top-k", common.top_k, "candidates kept after ranking")->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", common.threshold, "overlap ratio threshold for merging")
      ->check(CLI::Range(0.0, 1.0));
}

void add_mode_args(CLI::App* cmd, LlmArgs& llm, bool with_template = true) {
  if (with_template) {
    cmd->add_option("--mode", llm.mode, "id or motivate")->check(CLI::IsMember({"id", "motivate"}));
  }
  cmd->add_option("--shots", llm.shots, "0 or 1 worked examples")->check(CLI::IsMember({0, 1}));
  cmd->add_option("--max-prompt-tokens", llm.max_prompt_tokens, "prompt size limit (estimated tokens)")
      ->check(CLI::PositiveNumber);
}

void add_llm_args(CLI::App* cmd, LlmArgs& llm) {
  cmd->add_option("--llm", llm.spec, "live | replay:DIR | scripted:rank1 | scripted:oracle");
  cmd->add_option("--record", llm.record_dir, "store every exchange as a replay transcript");
  cmd->add_option("--model", llm.model, "model name for --llm live");
  cmd->add_option("--endpoint", llm.endpoint, "chat-completions URL for --llm live");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Web element localization with visually overlapping node merging, weighted "
               "similarity ranking and LLM reranking"};
  app.require_subcommand(1);

  InputArgs in;
  CommonArgs common;
  LlmArgs llm;

  auto* rank = app.add_subcommand("rank", "print the ranked candidate table");
  add_input_args(rank, in);
  add_common_args(rank, common);

  auto* locate = app.add_subcommand("locate", "locate the target and check it against the oracle");
  add_input_args(locate, in);
  add_common_args(locate, common);
  add_mode_args(locate, llm);
  add_llm_args(locate, llm);

  auto* prompt = app.add_subcommand("prompt", "print the exact prompt sent to the model");
  add_input_args(prompt, in);
  add_common_args(prompt, common);
  add_mode_args(prompt, llm);

  std::string corpus_path;
  std::string phases = "1";
  std::string report_dir = "report";
  std::string annotations;
  int jobs = 1;
  double price = kGpt4PricePer1kTokens;
  auto* evaluate = app.add_subcommand("evaluate", "run experiment phases over a corpus");
  evaluate->add_option("corpus", corpus_path, "corpus directory")->required();
  evaluate->add_option("--phases", phases, "comma-separated phases (1,2,3)");
  evaluate->add_option("--report", report_dir, "output directory");
  evaluate->add_option("--annotations", annotations, "human-coded motivation categories (CSV)");
  evaluate->add_option("--jobs", jobs, "concurrent localizations")->check(CLI::PositiveNumber);
  evaluate->add_option("--price", price, "USD per 1000 tokens")->check(CLI::NonNegativeNumber);
  add_common_args(evaluate, common);
  // Phase 2 asks for motivations and phase 3 for the id only.
  add_mode_args(evaluate, llm, false);
  add_llm_args(evaluate, llm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (rank->parsed()) return cmd_rank(in, common);
    if (prompt->parsed()) return cmd_prompt(in, common, llm);
    if (locate->parsed()) return cmd_locate(in, common, llm);
    if (evaluate->parsed()) {
      return cmd_evaluate(corpus_path, phases, report_dir, annotations, jobs, price, common, llm);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

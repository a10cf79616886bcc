#include <sys/wait.h>

#include <cstdio>

#include <gtest/gtest.h>
#include <json.hpp>

#include "builders.hpp"
#include "similo/report.hpp"

namespace {

struct Run {
  int exit_code = -1;
  std::string output;  // stdout, plus stderr unless discarded
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run similo_cli(const std::string& args, const std::string& env = "", bool keep_stderr = true) {
  const std::string command =
      env + " " + quote(SIMILO_CLI_PATH) + " " + args + (keep_stderr ? " 2>&1" : " 2>/dev/null");
  Run run;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return run;
  char buffer[4096];
  std::size_t n;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) run.output.append(buffer, n);
  const int status = ::pclose(pipe);
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::string ten_candidates_args() {
  const auto dir = build::fixtures() / "ten_candidates";
  std::string oracle = build::read_file(dir / "oracle.txt");
  while (!oracle.empty() && oracle.back() == '\n') oracle.pop_back();
  return "--ranked " + quote((dir / "candidates.txt").string()) + " " +
         quote((dir / "desired.txt").string()) + " --oracle " + quote(oracle);
}

std::string shop_args(const std::string& pair) {
  const auto dir = build::fixtures() / "corpus/shop";
  return quote((dir / "new_snapshot.jsonl").string()) + " " + quote((dir / "old_target.jsonl").string()) +
         " --pair " + pair;
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

std::size_t located_count(const std::filesystem::path& csv) {
  const auto rows = similo::parse_csv(build::read_file(csv));
  const auto& header = rows.at(0);
  const auto col = std::find(header.begin(), header.end(), "located") - header.begin();
  std::size_t n = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) n += rows[i].at(col) == "1";
  return n;
}

}  // namespace

TEST(Cli, LocateReplaysTenCandidates) {
  const auto replay = build::fixtures() / "ten_candidates/replay";
  const auto r = similo_cli("locate " + ten_candidates_args() + " --shots 0 --llm replay:" + quote(replay.string()));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("chosen widget_id: 201\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("chosen rank: 3\n"), std::string::npos);
  EXPECT_NE(r.output.find("located: yes\n"), std::string::npos);
  for (const char* n : {"  1. ", "  2. ", "  3. ", "  4. "}) EXPECT_NE(r.output.find(n), std::string::npos);
  EXPECT_EQ(r.output.find("  5. "), std::string::npos);
}

TEST(Cli, VonSimiloAloneMissesTenCandidates) {
  const auto r = similo_cli("locate " + ten_candidates_args());
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("chosen widget_id: 202\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("located: no\n"), std::string::npos);
}

TEST(Cli, ReplayMissExitsTwo) {
  const auto dir = build::temp_dir("cli_replay_miss");
  const auto r = similo_cli("locate " + ten_candidates_args() + " --llm replay:" + quote(dir.string()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error: ReplayMiss"), std::string::npos) << r.output;
}

TEST(Cli, MissingApiKeyExitsTwo) {
  const auto r = similo_cli("locate " + ten_candidates_args() + " --llm live", "env -u SIMILO_LLM_API_KEY");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error: MissingApiKey"), std::string::npos) << r.output;
}

TEST(Cli, EmptySnapshotExitsTwo) {
  const auto dir = build::temp_dir("cli_empty");
  build::write_file(dir / "empty.jsonl", "");
  const auto target = build::fixtures() / "corpus/shop/old_target.jsonl";
  const auto r = similo_cli("locate " + quote((dir / "empty.jsonl").string()) + " " + quote(target.string()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error: EmptySnapshot"), std::string::npos) << r.output;
}

TEST(Cli, RankTableHonoursTopK) {
  const auto full = similo_cli("rank " + shop_args("shop-03"));
  EXPECT_EQ(full.exit_code, 0) << full.output;
  EXPECT_EQ(full.output.rfind("rank\twidget_id\tscore\txpath\n", 0), 0u) << full.output;
  EXPECT_EQ(count_lines(full.output), 11u);
  const auto one = similo_cli("rank " + shop_args("shop-03") + " --top-k 1");
  EXPECT_EQ(one.exit_code, 0);
  EXPECT_EQ(count_lines(one.output), 2u) << one.output;
  EXPECT_EQ(full.output.substr(0, one.output.size()), one.output);
}

TEST(Cli, PromptGoldenAndSizeLimit) {
  const auto dir = build::fixtures() / "skeleton";
  const auto args = "prompt --ranked " + quote((dir / "candidates.txt").string()) + " " +
                    quote((dir / "desired.txt").string());
  const auto r = similo_cli(args + " --mode id --shots 0", "", false);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output, build::read_file(dir / "prompt_id.txt"));
  const auto big = similo_cli(args + " --max-prompt-tokens 10");
  EXPECT_EQ(big.exit_code, 2);
  EXPECT_NE(big.output.find("error: PromptTooLarge"), std::string::npos) << big.output;
}

TEST(Cli, EvaluatePhaseTwoNeedsPhaseOne) {
  const auto report = build::temp_dir("cli_phase2");
  const auto corpus = build::fixtures() / "corpus";
  const auto r = similo_cli("evaluate " + quote(corpus.string()) + " --phases 2 --llm scripted:oracle --report " +
                            quote(report.string()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error: MissingPhase1Results"), std::string::npos) << r.output;
  const auto no_llm = similo_cli("evaluate " + quote(corpus.string()) + " --phases 1,3 --report " +
                                 quote(report.string()));
  EXPECT_EQ(no_llm.exit_code, 2);
  EXPECT_NE(no_llm.output.find("error: ConfigError"), std::string::npos) << no_llm.output;
}

TEST(Cli, EvaluateWithRankOneBackendMatchesPhaseOne) {
  const auto report = build::temp_dir("cli_rank1");
  const auto corpus = build::fixtures() / "corpus";
  const auto r = similo_cli("evaluate " + quote(corpus.string()) +
                            " --phases 1,3 --llm scripted:rank1 --report " + quote(report.string()));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"phase1.csv", "phase3.csv", "summary.md", "metadata.json"}) {
    EXPECT_TRUE(std::filesystem::exists(report / f)) << f;
  }
  EXPECT_EQ(located_count(report / "phase1.csv"), 17u);
  EXPECT_EQ(located_count(report / "phase3.csv"), 17u);
  const auto meta = nlohmann::json::parse(build::read_file(report / "metadata.json"));
  EXPECT_EQ(meta["llm"]["backend"], "scripted:rank1");
  EXPECT_EQ(meta["llm"]["temperature"], 0.0);
  EXPECT_EQ(meta["timing_std"], "population");
}

TEST(Cli, EvaluateReplaysTheRecordedCorpusRun) {
  const auto report = build::temp_dir("cli_replay_eval");
  const auto corpus = build::fixtures() / "corpus";
  const auto replay = build::fixtures() / "corpus_replay";
  const auto r = similo_cli("evaluate " + quote(corpus.string()) + " --phases 1,2,3 --jobs 4 --llm replay:" +
                            quote(replay.string()) + " --report " + quote(report.string()));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(located_count(report / "phase1.csv"), 17u);
  EXPECT_EQ(located_count(report / "phase2.csv"), 3u);
  EXPECT_EQ(located_count(report / "phase3.csv"), 20u);
  const auto motivations = similo::parse_csv(build::read_file(report / "motivations.csv"));
  EXPECT_GE(motivations.size(), 4u);
}

TEST(Cli, AnnotationsFeedTheSummary) {
  const auto report = build::temp_dir("cli_annotations");
  build::write_file(report / "coded.csv",
                    "pair_id,motivation_index,motivation_text,category\n"
                    "shop-03,1,a,comparison_operator\n"
                    "shop-03,2,b,context_awareness\n"
                    "news-02,1,c,context_awareness\n"
                    "bank-01,1,d,semantic_understanding\n");
  const auto r = similo_cli("evaluate " + quote((build::fixtures() / "corpus").string()) +
                            " --phases 1 --annotations " + quote((report / "coded.csv").string()) +
                            " --report " + quote((report / "out").string()));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const auto md = build::read_file(report / "out/summary.md");
  EXPECT_NE(md.find("50"), std::string::npos) << md;
  EXPECT_NE(md.find("25"), std::string::npos) << md;
}

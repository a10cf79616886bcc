#include <gtest/gtest.h>
#include <json.hpp>

#include "builders.hpp"
#include "similo/error.hpp"
#include "similo/harness.hpp"

namespace {

struct Shipped {
  std::vector<similo::CorpusEntry> corpus;
  std::set<std::string> expected_failures;
};

const Shipped& shipped() {
  static const Shipped s = [] {
    Shipped out;
    out.corpus = similo::load_corpus(build::fixtures() / "corpus");
    const auto expected =
        nlohmann::json::parse(build::read_file(build::fixtures() / "corpus/expected.json"));
    out.expected_failures = expected["phase1_failures"].get<std::set<std::string>>();
    return out;
  }();
  return s;
}

std::set<std::string> ids_where(const std::vector<similo::LocalizationOutcome>& v, bool located) {
  std::set<std::string> out;
  for (const auto& o : v) {
    if (o.located == located) out.insert(o.target_id);
  }
  return out;
}

std::vector<std::string> order_of(const std::vector<similo::LocalizationOutcome>& v) {
  std::vector<std::string> out;
  for (const auto& o : v) out.push_back(o.target_id);
  return out;
}

}  // namespace

TEST(RunPhase, PhaseOneFailsExactlyTheEngineeredPairs) {
  const auto& s = shipped();
  const auto phase1 = similo::run_phase(s.corpus, 1, {});
  ASSERT_EQ(phase1.size(), s.corpus.size());
  EXPECT_EQ(ids_where(phase1, false), s.expected_failures);
  for (std::size_t i = 0; i < phase1.size(); ++i) {
    EXPECT_EQ(phase1[i].target_id, s.corpus[i].pair_id);
    EXPECT_EQ(phase1[i].method, similo::Method::kVonSimilo);
    // Every engineered failure still has its oracle in the top ten.
    EXPECT_TRUE(phase1[i].oracle_in_top_k) << phase1[i].target_id;
  }
}

TEST(RunPhase, PhaseTwoRunsOnPhaseOneFailuresOnly) {
  const auto& s = shipped();
  const auto phase1 = similo::run_phase(s.corpus, 1, {});
  auto backend = similo::scripted_oracle();
  const auto phase2 = similo::run_phase(s.corpus, 2, {}, &backend, &phase1);
  const auto ran = order_of(phase2);
  EXPECT_EQ(std::set<std::string>(ran.begin(), ran.end()), ids_where(phase1, false));
  EXPECT_EQ(phase2.size(), s.expected_failures.size());
  for (const auto& o : phase2) {
    EXPECT_TRUE(o.located) << o.target_id;
    EXPECT_EQ(o.method, similo::Method::kVonSimiloLlm);
    ASSERT_TRUE(o.llm_answer.has_value());
    EXPECT_FALSE(o.llm_answer->motivations.empty());
  }
}

TEST(RunPhase, PhaseThreeWithOracleBackendLocatesAll) {
  const auto& s = shipped();
  auto backend = similo::scripted_oracle();
  const auto phase3 = similo::run_phase(s.corpus, 3, {}, &backend);
  ASSERT_EQ(phase3.size(), s.corpus.size());
  EXPECT_TRUE(ids_where(phase3, false).empty());
  for (const auto& o : phase3) {
    ASSERT_TRUE(o.llm_answer.has_value());
    EXPECT_TRUE(o.llm_answer->motivations.empty());
  }
}

TEST(RunPhase, RankOneBackendMatchesPhaseOne) {
  const auto& s = shipped();
  auto backend = similo::scripted_rank1();
  const auto phase1 = similo::run_phase(s.corpus, 1, {});
  const auto phase3 = similo::run_phase(s.corpus, 3, {}, &backend);
  EXPECT_EQ(ids_where(phase1, true), ids_where(phase3, true));
}

TEST(RunPhase, NothingFailedMeansEmptyPhaseTwo) {
  const auto& s = shipped();
  auto phase1 = similo::run_phase(s.corpus, 1, {});
  for (auto& o : phase1) o.located = true;
  auto backend = similo::scripted_oracle();
  EXPECT_TRUE(similo::run_phase(s.corpus, 2, {}, &backend, &phase1).empty());
}

TEST(RunPhase, ParallelRunsKeepCorpusOrder) {
  const auto& s = shipped();
  auto backend = similo::scripted_oracle();
  similo::HarnessOptions serial;
  similo::HarnessOptions parallel;
  parallel.jobs = 4;
  for (int phase : {1, 3}) {
    const auto a = similo::run_phase(s.corpus, phase, serial, &backend);
    const auto b = similo::run_phase(s.corpus, phase, parallel, &backend);
    ASSERT_EQ(order_of(a), order_of(b));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].chosen, b[i].chosen);
      EXPECT_EQ(a[i].located, b[i].located);
    }
  }
}

TEST(RunPhase, Preconditions) {
  const auto& s = shipped();
  auto backend = similo::scripted_oracle();
  auto code = [](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const similo::Error& e) {
      return e.code();
    }
    return similo::ErrorCode::kEmptySnapshot;
  };
  EXPECT_EQ(code([&] { similo::run_phase(s.corpus, 2, {}, &backend); }),
            similo::ErrorCode::kMissingPhase1Results);
  EXPECT_EQ(code([&] { similo::run_phase(s.corpus, 3, {}); }), similo::ErrorCode::kConfigError);
  EXPECT_EQ(code([&] { similo::run_phase(s.corpus, 4, {}, &backend); }), similo::ErrorCode::kConfigError);
  EXPECT_TRUE(similo::run_phase({}, 1, {}).empty());
}

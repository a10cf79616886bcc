#include <gtest/gtest.h>

#include "builders.hpp"
#include "oracles.hpp"
#include "similo/error.hpp"
#include "similo/pipeline.hpp"

using similo::PromptMode;
using similo::PromptTemplate;
using similo::PropertyKey;

namespace {

const auto kConfig = similo::ScoringConfig::defaults();
const auto kIdOnly = PromptMode::zero_shot(PromptTemplate::kIdOnly);

// The old page had a "Save" button. In the new one it was renamed "Store"
// and moved down, while a "Sale" button took over its old spot.
struct RenamedButton {
  std::vector<similo::PropertyRecord> snapshot;
  similo::TargetSpec target;
};

RenamedButton renamed_button() {
  RenamedButton s;
  s.snapshot = {
      build::node(0, "/html/body/h1", {40, 20, 300, 40},
                  {{PropertyKey::kTag, "h1"}, {PropertyKey::kVisibleText, "Checkout"}}),
      build::node(1, "/html/body/form/button[1]", {40, 120, 80, 30},
                  {{PropertyKey::kTag, "button"}, {PropertyKey::kVisibleText, "Sale"}}),
      build::node(2, "/html/body/form/button[2]", {40, 300, 80, 30},
                  {{PropertyKey::kTag, "button"}, {PropertyKey::kVisibleText, "Store"}}),
      build::node(3, "/html/body/footer/a", {40, 700, 120, 20},
                  {{PropertyKey::kTag, "a"}, {PropertyKey::kVisibleText, "Help"}}),
  };
  const auto old = build::node(0, "/html/body/form/button[1]", {40, 120, 80, 30},
                               {{PropertyKey::kTag, "button"}, {PropertyKey::kVisibleText, "Save"}});
  s.target.desired = similo::element_from_record(old, 0);
  s.target.oracle_xpath = "/html/body/form/button[2]";
  return s;
}

class ThrowingBackend final : public similo::Backend {
 public:
  explicit ThrowingBackend(similo::ErrorCode code) : code_(code) {}
  std::string complete(const similo::PromptBundle&, const similo::CallContext&) override {
    throw similo::Error(code_, "scripted failure");
  }
  std::string describe() const override { return "throwing"; }

 private:
  similo::ErrorCode code_;
};

similo::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const similo::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return similo::ErrorCode::kConfigError;
}

}  // namespace

TEST(CheckOracle, ExactMemberXPathMatch) {
  auto e = build::element(0, {{PropertyKey::kXPath, {"/html/body/div", "/html/body/div/input"}}});
  EXPECT_TRUE(similo::check_oracle(e, "/html/body/div/input"));
  EXPECT_TRUE(similo::check_oracle(e, "/html/body/div"));
  EXPECT_FALSE(similo::check_oracle(e, "/html/body/div/"));
  EXPECT_FALSE(similo::check_oracle(e, "/HTML/body/div"));
  EXPECT_FALSE(similo::check_oracle(e, "/html/body"));
  EXPECT_FALSE(similo::check_oracle(e, ""));
}

TEST(LocateVonSimilo, DecoyWinsOnProperties) {
  const auto s = renamed_button();
  const auto ranked = similo::rank_candidates(s.target, similo::merge_records(s.snapshot), kConfig);
  ASSERT_EQ(ranked[0].element.widget_id, 1);
  ASSERT_EQ(ranked[1].element.widget_id, 2);

  const auto out = similo::locate_von_similo(s.target, s.snapshot, kConfig);
  EXPECT_EQ(out.method, similo::Method::kVonSimilo);
  EXPECT_EQ(out.chosen.widget_id, 1);
  EXPECT_EQ(out.chosen_rank, 1);
  EXPECT_FALSE(out.located);
  EXPECT_TRUE(out.oracle_in_top_k);
  EXPECT_FALSE(out.llm_answer.has_value());
  EXPECT_GE(out.elapsed_ms, 0.0);
  EXPECT_GE(out.elapsed_ms + 1e-9, out.merge_ms);
}

TEST(LocateVonSimiloLlm, OracleBackendRecoversTheRenamedButton) {
  const auto s = renamed_button();
  for (auto kind : {PromptTemplate::kIdOnly, PromptTemplate::kWithMotivations}) {
    auto backend = similo::scripted_oracle();
    const auto out = similo::locate_von_similo_llm(s.target, s.snapshot, kConfig,
                                                   PromptMode::zero_shot(kind), backend);
    EXPECT_EQ(out.method, similo::Method::kVonSimiloLlm);
    EXPECT_TRUE(out.located);
    EXPECT_EQ(out.chosen.widget_id, 2);
    EXPECT_EQ(out.chosen_rank, 2);
    EXPECT_FALSE(out.fallback_used);
    ASSERT_TRUE(out.llm_answer.has_value());
    EXPECT_EQ(out.llm_answer->widget_id, 2);
    EXPECT_EQ(out.llm_answer->motivations.empty(), kind == PromptTemplate::kIdOnly);
    EXPECT_GT(out.prompt_tokens, 0);
    EXPECT_GT(out.response_tokens, 0);
  }
}

TEST(LocateVonSimiloLlm, UnknownIdFallsBackToRankOne) {
  const auto s = renamed_button();
  auto backend = similo::ScriptedBackend::raw("9999", [](const auto&, const auto&) { return "9999"; });
  const auto out = similo::locate_von_similo_llm(s.target, s.snapshot, kConfig, kIdOnly, backend);
  EXPECT_TRUE(out.fallback_used);
  EXPECT_EQ(out.llm_error, "UnknownWidgetId");
  EXPECT_EQ(out.llm_raw, "9999");
  EXPECT_FALSE(out.llm_answer.has_value());
  EXPECT_EQ(out.chosen_rank, 1);
  EXPECT_EQ(out.chosen.widget_id, 1);
}

TEST(LocateVonSimiloLlm, UnparsableAnswerFallsBack) {
  const auto s = renamed_button();
  auto backend = similo::ScriptedBackend::raw("chatty", [](const auto&, const auto&) {
    return "I cannot decide.";
  });
  const auto out = similo::locate_von_similo_llm(s.target, s.snapshot, kConfig, kIdOnly, backend);
  EXPECT_TRUE(out.fallback_used);
  EXPECT_EQ(out.llm_error, "UnparsableAnswer");
  EXPECT_EQ(out.chosen_rank, 1);
}

TEST(LocateVonSimiloLlm, TransportFailuresFallBackConfigFaultsPropagate) {
  const auto s = renamed_button();
  for (auto code : {similo::ErrorCode::kRateLimited, similo::ErrorCode::kTransportError}) {
    ThrowingBackend backend(code);
    const auto out = similo::locate_von_similo_llm(s.target, s.snapshot, kConfig, kIdOnly, backend);
    EXPECT_TRUE(out.fallback_used);
    EXPECT_EQ(out.llm_error, similo::error_name(code));
    EXPECT_EQ(out.chosen_rank, 1);
    EXPECT_TRUE(out.llm_raw.empty());
  }
  for (auto code : {similo::ErrorCode::kReplayMiss, similo::ErrorCode::kMissingApiKey,
                    similo::ErrorCode::kPromptTooLarge}) {
    ThrowingBackend backend(code);
    EXPECT_EQ(code_of([&] {
                similo::locate_von_similo_llm(s.target, s.snapshot, kConfig, kIdOnly, backend);
              }),
              code);
  }
}

TEST(LocateVonSimiloLlm, OversizedPromptIsRejected) {
  const auto s = renamed_button();
  auto backend = similo::scripted_rank1();
  similo::LocateOptions options;
  options.max_prompt_tokens = 20;
  EXPECT_EQ(code_of([&] {
              similo::locate_von_similo_llm(s.target, s.snapshot, kConfig, kIdOnly, backend, options);
            }),
            similo::ErrorCode::kPromptTooLarge);
}

TEST(LocateVonSimiloLlm, EmptySnapshot) {
  const auto s = renamed_button();
  auto backend = similo::scripted_rank1();
  const std::vector<similo::PropertyRecord> none;
  EXPECT_EQ(code_of([&] { similo::locate_von_similo(s.target, none, kConfig); }),
            similo::ErrorCode::kEmptySnapshot);
  EXPECT_EQ(code_of([&] { similo::locate_von_similo_llm(s.target, none, kConfig, kIdOnly, backend); }),
            similo::ErrorCode::kEmptySnapshot);
}

TEST(RerankRanked, OracleOutsideTheTopTenCannotBeLocated) {
  std::vector<similo::ScoredCandidate> ranked;
  for (int i = 0; i < 12; ++i) {
    similo::ScoredCandidate c;
    c.element = build::element(i, {{PropertyKey::kTag, {"div"}},
                                   {PropertyKey::kXPath, {"/html/body/div[" + std::to_string(i + 1) + "]"}}});
    c.score = 12.0 - i;
    c.rank = i + 1;
    ranked.push_back(c);
  }
  similo::TargetSpec target;
  target.desired = build::element(0, {{PropertyKey::kTag, {"div"}}});
  target.oracle_xpath = "/html/body/div[11]";

  auto backend = similo::scripted_oracle();
  const auto out = similo::rerank_ranked(target, ranked, 10, kIdOnly, backend);
  EXPECT_FALSE(out.oracle_in_top_k);
  EXPECT_FALSE(out.located);
  EXPECT_EQ(out.chosen_rank, 1);

  const auto wider = similo::rerank_ranked(target, ranked, 11, kIdOnly, backend);
  EXPECT_TRUE(wider.oracle_in_top_k);
  EXPECT_TRUE(wider.located);
  EXPECT_EQ(wider.chosen_rank, 11);
}

TEST(RerankRanked, PromptHoldsOnlyTheTopK) {
  const auto s = renamed_button();
  const auto ranked = similo::rank_candidates(s.target, similo::merge_records(s.snapshot), kConfig);
  std::vector<int> seen;
  auto backend = similo::ScriptedBackend::raw("spy", [&](const similo::PromptBundle& b, const auto&) {
    seen = b.candidate_ids;
    return std::to_string(b.candidate_ids.back());
  });
  const auto out = similo::rerank_ranked(s.target, ranked, 2, kIdOnly, backend);
  EXPECT_EQ(seen, (std::vector<int>{1, 2}));
  EXPECT_EQ(out.chosen.widget_id, 2);
  EXPECT_TRUE(out.located);
}

TEST(LocateVonSimiloLlm, RankOneBackendAgreesWithVonSimilo) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    gen::Rng rng(seed);
    const auto snapshot = gen::snapshot(rng, 40);
    const auto& anchor = snapshot[rng() % snapshot.size()];
    const auto target = similo::apply_von_to_target(snapshot, *anchor.get(PropertyKey::kXPath));
    auto backend = similo::scripted_rank1();
    const auto plain = similo::locate_von_similo(target, snapshot, kConfig);
    const auto llm = similo::locate_von_similo_llm(target, snapshot, kConfig, kIdOnly, backend);
    ASSERT_EQ(plain.chosen, llm.chosen) << "seed " << seed;
    ASSERT_EQ(plain.located, llm.located) << "seed " << seed;
    ASSERT_EQ(plain.oracle_in_top_k, llm.oracle_in_top_k) << "seed " << seed;
    ASSERT_FALSE(llm.fallback_used);
  }
}

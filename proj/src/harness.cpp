#include "similo/harness.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "similo/error.hpp"

namespace similo {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<LocalizationOutcome> run_phase(const std::vector<CorpusEntry>& corpus, int phase,
                                           const HarnessOptions& options, Backend* backend,
                                           const std::vector<LocalizationOutcome>* phase1) {
  if (phase < 1 || phase > 3) {
    throw Error(ErrorCode::kConfigError, "phase must be 1, 2 or 3");
  }
  if (phase == 2 && phase1 == nullptr) {
    throw Error(ErrorCode::kMissingPhase1Results, "phase 2 reruns the phase 1 failures");
  }
  if (phase > 1 && backend == nullptr) {
    throw Error(ErrorCode::kConfigError, "phase " + std::to_string(phase) + " needs an LLM backend");
  }

  std::vector<const CorpusEntry*> entries;
  if (phase == 2) {
    if (phase1->size() != corpus.size()) {
      throw Error(ErrorCode::kMismatchedCorpora, "phase 1 results do not match the corpus");
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if ((*phase1)[i].target_id != corpus[i].pair_id) {
        throw Error(ErrorCode::kMismatchedCorpora, "phase 1 results do not match the corpus");
      }
      if (!(*phase1)[i].located) entries.push_back(&corpus[i]);
    }
  } else {
    for (const auto& e : corpus) entries.push_back(&e);
  }

  const PromptTemplate kind =
      phase == 2 ? PromptTemplate::kWithMotivations : PromptTemplate::kIdOnly;
  const PromptMode mode =
      options.one_shot ? PromptMode::one_shot(kind) : PromptMode::zero_shot(kind);

  std::vector<LocalizationOutcome> outcomes(entries.size());
  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    const auto& entry = *entries[i];
    outcomes[i] = phase == 1
                      ? locate_von_similo(entry.target, *entry.snapshot, options.config, options.locate)
                      : locate_von_similo_llm(entry.target, *entry.snapshot, options.config, mode,
                                              *backend, options.locate);
    outcomes[i].target_id = entry.pair_id;
  });
  return outcomes;
}

}  // namespace similo

#pragma once

#include <vector>

#include "similo/backend.hpp"
#include "similo/corpus.hpp"
#include "similo/pipeline.hpp"

namespace similo {

struct HarnessOptions {
  ScoringConfig config = ScoringConfig::defaults();
  LocateOptions locate;
  bool one_shot = true;
  int jobs = 1;  // concurrent localizations
};

// Phase 1: VON Similo on every entry.
// Phase 2: VON Similo LLM asking for motivations, on phase-1 failures only.
// Phase 3: VON Similo LLM asking for the widget id only, on every entry.
// Outcomes follow corpus order. Phase 2 throws Error(kMissingPhase1Results)
// without `phase1`; phases 2 and 3 need a backend.
std::vector<LocalizationOutcome> run_phase(const std::vector<CorpusEntry>& corpus, int phase,
                                           const HarnessOptions& options, Backend* backend = nullptr,
                                           const std::vector<LocalizationOutcome>* phase1 = nullptr);

}  // namespace similo

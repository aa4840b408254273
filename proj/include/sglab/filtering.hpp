#pragma once

#include <vector>

#include "sglab/classifier.hpp"
#include "sglab/proposer.hpp"

namespace sglab {

struct FilterDecision {
    int selected = 0;
    std::vector<float> scores;
    ProposerMode mode = ProposerMode::ImageStyle;
};

// Argmax with ties broken toward the lowest index.
FilterDecision select_by_scores(const std::vector<float>& scores, ProposerMode mode);

// Scores each candidate's goal image (ImageStyle) or final clip frame
// (VideoStyle) with the classifier and picks the highest. Downstream control
// consumes the selected candidate's image or full clip; provenance is never
// read here.
FilterDecision select_subgoal(const ClassifierNet& classifier, const ImageF& s,
                              const std::vector<SubgoalCandidate>& candidates,
                              const Instruction& instr, ProposerMode mode);

}  // namespace sglab

#include "sglab/filtering.hpp"

#include <stdexcept>

namespace sglab {

FilterDecision select_by_scores(const std::vector<float>& scores, ProposerMode mode) {
    if (scores.empty()) throw std::invalid_argument("select_by_scores: empty candidate list");
    FilterDecision d;
    d.mode = mode;
    d.scores = scores;
    d.selected = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[d.selected]) d.selected = static_cast<int>(i);
    return d;
}

FilterDecision select_subgoal(const ClassifierNet& classifier, const ImageF& s,
                              const std::vector<SubgoalCandidate>& candidates,
                              const Instruction& instr, ProposerMode mode) {
    if (candidates.empty())
        throw std::invalid_argument("select_subgoal: empty candidate list");
    std::vector<const ImageF*> goals;
    goals.reserve(candidates.size());
    for (const auto& c : candidates) goals.push_back(&c.final_frame());
    const std::vector<float> scores = classifier.score_goals(s, goals, instr.token());
    return select_by_scores(scores, mode);
}

}  // namespace sglab

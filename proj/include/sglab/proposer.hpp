#pragma once

#include <string>
#include <vector>

#include "sglab/image.hpp"
#include "sglab/rng.hpp"
#include "sglab/world.hpp"

namespace sglab {

enum class ProposerMode { ImageStyle, VideoStyle };
enum class Provenance { OnTask, OffTask, Unknown };

// A proposed subgoal: one goal image (ImageStyle) or a 16-frame clip
// (VideoStyle). Provenance and severity exist for evaluation bookkeeping
// only; scoring and control never read them.
struct SubgoalCandidate {
    std::vector<ImageF> frames;
    Provenance provenance = Provenance::Unknown;
    int actual_token = -1;  // the instruction that actually generated an OffTask roll
    float artifact_severity = 0.0f;
    int index = 0;

    const ImageF& final_frame() const { return frames.back(); }
};

struct ProposerConfig {
    ProposerMode mode = ProposerMode::ImageStyle;
    int K = 8;
    double p_off_task = 0.0;
    float severity_min = 0.0f;
    float severity_max = 0.0f;
    int subgoal_horizon = 20;  // ImageStyle: steps ahead for the goal image
    int clip_length = 16;      // VideoStyle: frames per clip
};

// Surrogate for a fine-tuned image/video generative model: each candidate
// independently rolls a noise-free scripted expert forward from the current
// state, either under the commanded instruction (OnTask) or, with probability
// p_off_task, under a different instruction achievable in the scene (OffTask),
// then renders and applies artifact injection with a severity drawn from
// [severity_min, severity_max].
std::vector<SubgoalCandidate> propose(const ProposerConfig& cfg, const WorldState& state,
                                      const Instruction& instr, Rng& rng);

// Severity-scaled corruption: hue and brightness drift (exceeding the
// training-augmentation ranges at severity 1), blended 3x3 box blur, and with
// probability severity/2 a hallucinated 3-6 px colored blob. Severity 0 is
// the identity.
ImageF inject_artifacts(const ImageF& image, float severity, Rng& rng);

// Plugin seam for real generators: JSON manifest
//   {"mode": "image"|"video", "instruction": <token>,
//    "candidates": ["goal0.rgb", ...]}
// Image entries are raw 32x32x3 byte files (the dataset pixel format); video
// entries are directories holding exactly 16 such frame files (sorted by
// name). Loaded candidates carry Unknown provenance.
std::vector<SubgoalCandidate> load_external_candidates(const std::string& manifest_path);

}  // namespace sglab

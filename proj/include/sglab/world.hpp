#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sglab/image.hpp"
#include "sglab/rng.hpp"

namespace sglab {

// A desk-scale manipulation world: a gripper agent moves in the unit square
// among colored shape objects and two containers, observed as 32x32 RGB
// renders. Tasks are "put <color> <shape> in <container>".

enum class Shape : int { Square = 0, Circle = 1, Triangle = 2 };
enum class Color : int { Red = 0, Green = 1, Blue = 2, Yellow = 3 };
enum class ContainerKind : int { Bowl = 0, Box = 1 };
enum class Grip : int { NoOp = 0, Close = 1, Open = 2 };

inline constexpr int kNumShapes = 3;
inline constexpr int kNumColors = 4;
inline constexpr int kNumContainers = 2;
inline constexpr int kImageSize = 32;
inline constexpr float kMaxDelta = 0.05f;
inline constexpr float kGraspRadius = 0.06f;
inline constexpr float kSuccessRadius = 0.08f;
inline constexpr float kMinSeparation = 0.12f;
inline constexpr int kMaxEpisodeSteps = 100;
inline constexpr float kExpertNoiseSigma = 0.005f;

// The color excluded from all training data, mirroring an evaluation
// environment with unseen object attributes.
inline constexpr Color kHeldOutColor = Color::Yellow;

struct Vec2 {
    float x = 0.0f, y = 0.0f;
};

inline float dist(Vec2 a, Vec2 b) {
    const float dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

// Task token: ((shape * kNumColors) + color) * kNumContainers + container.
struct Instruction {
    Shape shape = Shape::Square;
    Color color = Color::Red;
    ContainerKind target = ContainerKind::Bowl;

    static constexpr int kVocabSize = kNumShapes * kNumColors * kNumContainers;  // 24

    int token() const {
        return (static_cast<int>(shape) * kNumColors + static_cast<int>(color)) *
                   kNumContainers +
               static_cast<int>(target);
    }
    static Instruction from_token(int token);
    bool operator==(const Instruction&) const = default;
    std::string str() const;
};

// 4 specific tokens plus everything referencing the held-out color are
// excluded from training data.
bool is_held_out_token(int token);
std::vector<int> held_in_tokens();
std::vector<int> held_out_tokens();

struct ObjectState {
    Shape shape = Shape::Square;
    Color color = Color::Red;
    Vec2 pos;
    bool held = false;
};

struct WorldState {
    Vec2 agent;
    bool gripper_closed = false;
    std::vector<ObjectState> objects;
    std::array<Vec2, kNumContainers> containers;  // indexed by ContainerKind
    int step_count = 0;

    const ObjectState* find_object(Shape s, Color c) const;
};

struct Action {
    float dx = 0.0f, dy = 0.0f;
    Grip grip = Grip::NoOp;
};

struct SceneOptions {
    int min_distractors = 2;
    int max_distractors = 4;
    bool allow_held_out_color = true;  // held-out-color objects as distractors
};

// Scene with the instruction's referent guaranteed present, both containers
// placed, and all entities pairwise at least kMinSeparation apart.
WorldState reset(std::uint64_t seed, const Instruction& instr,
                 const SceneOptions& opts = {});

// Scene containing one referent object per instruction (distinct shape+color
// combos required) plus `extra_distractors` random objects.
WorldState reset_multi(std::uint64_t seed, const std::vector<Instruction>& instrs,
                       int extra_distractors, const SceneOptions& opts = {});

// Pure transition: clipped move, then gripper handling, step counter + 1.
WorldState step(const WorldState& state, const Action& action);

// Deterministic supersampled rasterization; pixel values quantized to 1/255
// steps so renders round-trip the dataset byte format losslessly.
ImageF render(const WorldState& state);

bool task_success(const WorldState& state, const Instruction& instr);

// Greedy phase policy: approach, grasp, transport, release. rng may be null
// for a noise-free expert (used by the subgoal surrogate).
Action expert_action(const WorldState& state, const Instruction& instr, Rng* rng);

struct Trajectory {
    Instruction instr;
    std::vector<Image8> frames;       // len == states.size() == actions.size() + 1
    std::vector<WorldState> states;
    std::vector<Action> actions;
    bool success = false;
};

Trajectory rollout_expert(std::uint64_t seed, const Instruction& instr,
                          const SceneOptions& opts, float noise_sigma = kExpertNoiseSigma,
                          int max_steps = kMaxEpisodeSteps);

struct InstructionMix {
    std::vector<int> tokens;
    std::vector<double> weights;  // empty = uniform
    SceneOptions scene;

    static InstructionMix uniform_over(std::vector<int> toks);
    // Training mix: held-in tokens only, no held-out-color distractors.
    static InstructionMix training_mix();
    // Evaluation mix: fresh scenes over the same held-in tokens.
    static InstructionMix eval_mix();
};

struct Dataset;

// Action-only view (instructions stripped).
struct TrajectoryActionsView {
    const std::vector<Image8>* frames;
    const std::vector<Action>* actions;
    bool success;
};

// Video-only view (actions stripped).
struct TrajectoryVideoView {
    int token;
    const std::vector<Image8>* frames;
    bool success;
};

struct Dataset {
    std::vector<Trajectory> trajs;

    const std::vector<Trajectory>& view_la() const { return trajs; }
    std::vector<TrajectoryActionsView> view_a() const;
    std::vector<TrajectoryVideoView> view_l() const;
};

Dataset generate_dataset(int n_trajectories, std::uint64_t seed, const InstructionMix& mix);

// Dataset file format, magic "SGDS1" (little-endian integers/floats):
//   "SGDS1", u32 count, u32 H, u32 W, u32 C
//   per trajectory:
//     u32 token, u32 n_frames, u8 success
//     n_frames x H*W*C bytes
//     (n_frames - 1) x 3 f32 (dx, dy, grip as 0/1/2)
// World states are not persisted; frames/actions/instruction/success are.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace sglab

#include "sglab/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sglab {

// ---------------------------------------------------------------------------
// vocabulary

Instruction Instruction::from_token(int token) {
    if (token < 0 || token >= kVocabSize)
        throw std::invalid_argument("instruction token out of range: " + std::to_string(token));
    Instruction in;
    in.target = static_cast<ContainerKind>(token % kNumContainers);
    const int oc = token / kNumContainers;
    in.color = static_cast<Color>(oc % kNumColors);
    in.shape = static_cast<Shape>(oc / kNumColors);
    return in;
}

std::string Instruction::str() const {
    static const char* kShapeNames[] = {"square", "circle", "triangle"};
    static const char* kColorNames[] = {"red", "green", "blue", "yellow"};
    static const char* kContNames[] = {"bowl", "box"};
    return std::string("put ") + kColorNames[static_cast<int>(color)] + " " +
           kShapeNames[static_cast<int>(shape)] + " in " + kContNames[static_cast<int>(target)];
}

namespace {
// Extra held-out tokens beyond the held-out color: red square -> box,
// green circle -> bowl, blue circle -> bowl, blue triangle -> box.
constexpr int kExtraHeldOut[4] = {1, 10, 12, 21};
}  // namespace

bool is_held_out_token(int token) {
    const Instruction in = Instruction::from_token(token);
    if (in.color == kHeldOutColor) return true;
    for (int t : kExtraHeldOut)
        if (t == token) return true;
    return false;
}

std::vector<int> held_in_tokens() {
    std::vector<int> out;
    for (int t = 0; t < Instruction::kVocabSize; ++t)
        if (!is_held_out_token(t)) out.push_back(t);
    return out;
}

std::vector<int> held_out_tokens() {
    std::vector<int> out;
    for (int t = 0; t < Instruction::kVocabSize; ++t)
        if (is_held_out_token(t)) out.push_back(t);
    return out;
}

const ObjectState* WorldState::find_object(Shape s, Color c) const {
    for (const auto& o : objects)
        if (o.shape == s && o.color == c) return &o;
    return nullptr;
}

// ---------------------------------------------------------------------------
// scene construction

namespace {

constexpr float kPlaceLo = 0.12f;
constexpr float kPlaceHi = 0.88f;

Vec2 sample_position(Rng& rng, const std::vector<Vec2>& placed) {
    for (int attempt = 0; attempt < 4000; ++attempt) {
        Vec2 p{rng.uniformf(kPlaceLo, kPlaceHi), rng.uniformf(kPlaceLo, kPlaceHi)};
        bool ok = true;
        for (const auto& q : placed)
            if (dist(p, q) < kMinSeparation) {
                ok = false;
                break;
            }
        if (ok) return p;
    }
    throw std::runtime_error("scene placement failed; too many entities");
}

int combo_id(Shape s, Color c) { return static_cast<int>(s) * kNumColors + static_cast<int>(c); }

WorldState build_scene(std::uint64_t seed, const std::vector<std::pair<Shape, Color>>& required,
                       int n_distractors, const SceneOptions& opts) {
    Rng rng(derive_seed(seed, 0x5ce7eULL));
    WorldState st;

    std::vector<bool> used(kNumShapes * kNumColors, false);
    for (const auto& [s, c] : required) {
        if (used[combo_id(s, c)])
            throw std::invalid_argument("scene requires duplicate (shape,color) combo");
        used[combo_id(s, c)] = true;
    }

    // distractor pool: remaining distinct combos
    std::vector<std::pair<Shape, Color>> pool;
    for (int s = 0; s < kNumShapes; ++s)
        for (int c = 0; c < kNumColors; ++c) {
            if (used[s * kNumColors + c]) continue;
            if (!opts.allow_held_out_color && static_cast<Color>(c) == kHeldOutColor) continue;
            pool.emplace_back(static_cast<Shape>(s), static_cast<Color>(c));
        }
    // Fisher-Yates
    for (int i = static_cast<int>(pool.size()) - 1; i > 0; --i)
        std::swap(pool[i], pool[static_cast<int>(rng.uniform_int(0, i))]);

    std::vector<std::pair<Shape, Color>> combos = required;
    const int nd = std::min<int>(n_distractors, static_cast<int>(pool.size()));
    combos.insert(combos.end(), pool.begin(), pool.begin() + nd);

    std::vector<Vec2> placed;
    for (int k = 0; k < kNumContainers; ++k) {
        st.containers[k] = sample_position(rng, placed);
        placed.push_back(st.containers[k]);
    }
    for (const auto& [s, c] : combos) {
        ObjectState o;
        o.shape = s;
        o.color = c;
        o.pos = sample_position(rng, placed);
        placed.push_back(o.pos);
        st.objects.push_back(o);
    }
    st.agent = sample_position(rng, placed);
    st.gripper_closed = false;
    st.step_count = 0;
    return st;
}

}  // namespace

WorldState reset(std::uint64_t seed, const Instruction& instr, const SceneOptions& opts) {
    Rng rng(derive_seed(seed, 0xd15cULL));
    const int nd = static_cast<int>(
        rng.uniform_int(opts.min_distractors, std::max(opts.min_distractors, opts.max_distractors)));
    return build_scene(seed, {{instr.shape, instr.color}}, nd, opts);
}

WorldState reset_multi(std::uint64_t seed, const std::vector<Instruction>& instrs,
                       int extra_distractors, const SceneOptions& opts) {
    std::vector<std::pair<Shape, Color>> req;
    for (const auto& in : instrs) req.emplace_back(in.shape, in.color);
    return build_scene(seed, req, extra_distractors, opts);
}

// ---------------------------------------------------------------------------
// dynamics

namespace {
inline float clampf(float v, float lo, float hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

WorldState step(const WorldState& state, const Action& action) {
    WorldState st = state;
    const float dx = clampf(action.dx, -kMaxDelta, kMaxDelta);
    const float dy = clampf(action.dy, -kMaxDelta, kMaxDelta);
    st.agent.x = clampf(st.agent.x + dx, 0.0f, 1.0f);
    st.agent.y = clampf(st.agent.y + dy, 0.0f, 1.0f);

    // held object tracks the agent
    for (auto& o : st.objects)
        if (o.held) o.pos = st.agent;

    if (action.grip == Grip::Close) {
        st.gripper_closed = true;
        const bool holding =
            std::any_of(st.objects.begin(), st.objects.end(), [](const auto& o) { return o.held; });
        if (!holding) {
            int best = -1;
            float bestd = kGraspRadius;
            for (std::size_t i = 0; i < st.objects.size(); ++i) {
                const float d = dist(st.objects[i].pos, st.agent);
                if (d <= bestd) {
                    bestd = d;
                    best = static_cast<int>(i);
                }
            }
            if (best >= 0) {
                st.objects[best].held = true;
                st.objects[best].pos = st.agent;
            }
        }
    } else if (action.grip == Grip::Open) {
        st.gripper_closed = false;
        for (auto& o : st.objects) o.held = false;
    }
    ++st.step_count;
    return st;
}

bool task_success(const WorldState& state, const Instruction& instr) {
    const ObjectState* obj = state.find_object(instr.shape, instr.color);
    if (!obj) return false;
    if (obj->held) return false;
    return dist(obj->pos, state.containers[static_cast<int>(instr.target)]) <= kSuccessRadius;
}

// ---------------------------------------------------------------------------
// scripted expert

namespace {
constexpr float kApproachStop = 0.042f;  // < kGraspRadius with noise margin
constexpr float kReleaseDist = 0.045f;   // < kSuccessRadius with noise margin

Action move_toward(Vec2 from, Vec2 to, Rng* rng, float sigma) {
    Action a;
    a.dx = clampf(to.x - from.x, -kMaxDelta, kMaxDelta);
    a.dy = clampf(to.y - from.y, -kMaxDelta, kMaxDelta);
    if (rng && sigma > 0.0f) {
        a.dx = clampf(a.dx + sigma * static_cast<float>(rng->normal()), -kMaxDelta, kMaxDelta);
        a.dy = clampf(a.dy + sigma * static_cast<float>(rng->normal()), -kMaxDelta, kMaxDelta);
    }
    a.grip = Grip::NoOp;
    return a;
}
}  // namespace

Action expert_action(const WorldState& state, const Instruction& instr, Rng* rng) {
    const ObjectState* obj = state.find_object(instr.shape, instr.color);
    if (!obj)
        throw std::runtime_error("expert_action: referent not in scene for '" + instr.str() +
                                 "'");
    const Vec2 target = state.containers[static_cast<int>(instr.target)];

    if (task_success(state, instr)) return Action{0.0f, 0.0f, Grip::NoOp};

    // holding something other than the referent: drop it first
    const ObjectState* held = nullptr;
    for (const auto& o : state.objects)
        if (o.held) held = &o;
    if (held && held != obj) return Action{0.0f, 0.0f, Grip::Open};

    if (obj->held) {
        if (dist(state.agent, target) <= kReleaseDist) return Action{0.0f, 0.0f, Grip::Open};
        return move_toward(state.agent, target, rng, kExpertNoiseSigma);
    }

    // stuck closed without holding anything: reopen
    if (state.gripper_closed) return Action{0.0f, 0.0f, Grip::Open};

    if (dist(state.agent, obj->pos) <= kApproachStop) return Action{0.0f, 0.0f, Grip::Close};
    return move_toward(state.agent, obj->pos, rng, kExpertNoiseSigma);
}

Trajectory rollout_expert(std::uint64_t seed, const Instruction& instr,
                          const SceneOptions& opts, float noise_sigma, int max_steps) {
    Trajectory traj;
    traj.instr = instr;
    Rng noise(derive_seed(seed, 0xe8be27ULL));
    Rng* noise_ptr = noise_sigma > 0.0f ? &noise : nullptr;

    WorldState st = reset(seed, instr, opts);
    traj.states.push_back(st);
    traj.frames.push_back(quantize(render(st)));
    for (int t = 0; t < max_steps; ++t) {
        if (task_success(st, instr)) break;
        const Action a = expert_action(st, instr, noise_ptr);
        st = step(st, a);
        traj.actions.push_back(a);
        traj.states.push_back(st);
        traj.frames.push_back(quantize(render(st)));
    }
    traj.success = task_success(st, instr);
    return traj;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

struct Rgb {
    float r, g, b;
};

constexpr Rgb kBackground{0.07f, 0.07f, 0.09f};
constexpr Rgb kObjectColors[kNumColors] = {
    {0.85f, 0.20f, 0.20f},  // red
    {0.20f, 0.75f, 0.25f},  // green
    {0.25f, 0.40f, 0.85f},  // blue
    {0.85f, 0.80f, 0.15f},  // yellow
};
constexpr Rgb kBowlColor{0.60f, 0.60f, 0.60f};
constexpr Rgb kBoxColor{0.62f, 0.42f, 0.20f};
constexpr Rgb kAgentOpen{0.95f, 0.95f, 0.95f};
constexpr Rgb kAgentClosed{0.25f, 0.90f, 0.95f};

constexpr float kObjHalf = 0.055f;
constexpr float kCircleR = 0.062f;
constexpr float kTriHalf = 0.066f;
constexpr float kContOuter = 0.085f;
constexpr float kContInner = 0.055f;
constexpr float kAgentArm = 0.070f;
constexpr float kAgentThick = 0.018f;

inline bool in_square(Vec2 p, Vec2 c, float half) {
    return std::abs(p.x - c.x) <= half && std::abs(p.y - c.y) <= half;
}

inline bool in_circle(Vec2 p, Vec2 c, float r) {
    const float dx = p.x - c.x, dy = p.y - c.y;
    return dx * dx + dy * dy <= r * r;
}

inline bool in_triangle(Vec2 p, Vec2 c, float half) {
    // apex up (towards row 0), flat base below
    const float lx = p.x - c.x;
    const float ly = p.y - c.y;
    if (ly < -half || ly > half) return false;
    const float width = half * (ly + half) / (2.0f * half);  // 0 at apex, half at base
    return std::abs(lx) <= width;
}

inline bool in_object(Vec2 p, const ObjectState& o) {
    switch (o.shape) {
        case Shape::Square: return in_square(p, o.pos, kObjHalf);
        case Shape::Circle: return in_circle(p, o.pos, kCircleR);
        case Shape::Triangle: return in_triangle(p, o.pos, kTriHalf);
    }
    return false;
}

inline bool in_cross(Vec2 p, Vec2 c) {
    const float ax = std::abs(p.x - c.x), ay = std::abs(p.y - c.y);
    return (ax <= kAgentArm && ay <= kAgentThick) || (ay <= kAgentArm && ax <= kAgentThick);
}

Rgb scene_color(const WorldState& st, Vec2 p) {
    // top-most first: agent, held object, free objects, containers, background
    if (in_cross(p, st.agent)) return st.gripper_closed ? kAgentClosed : kAgentOpen;
    for (auto it = st.objects.rbegin(); it != st.objects.rend(); ++it)
        if (it->held && in_object(p, *it)) return kObjectColors[static_cast<int>(it->color)];
    for (auto it = st.objects.rbegin(); it != st.objects.rend(); ++it)
        if (!it->held && in_object(p, *it)) return kObjectColors[static_cast<int>(it->color)];
    const Vec2 bowl = st.containers[static_cast<int>(ContainerKind::Bowl)];
    if (in_circle(p, bowl, kContOuter) && !in_circle(p, bowl, kContInner)) return kBowlColor;
    const Vec2 box = st.containers[static_cast<int>(ContainerKind::Box)];
    if (in_square(p, box, kContOuter) && !in_square(p, box, kContInner)) return kBoxColor;
    return kBackground;
}

}  // namespace

ImageF render(const WorldState& state) {
    constexpr int SS = 4;  // 4x4 subsamples per pixel
    constexpr float inv = 1.0f / kImageSize;
    constexpr float ssinv = 1.0f / SS;
    ImageF im(kImageSize, kImageSize);
    for (int y = 0; y < kImageSize; ++y)
        for (int x = 0; x < kImageSize; ++x) {
            float r = 0.0f, g = 0.0f, b = 0.0f;
            for (int sy = 0; sy < SS; ++sy)
                for (int sx = 0; sx < SS; ++sx) {
                    const Vec2 p{(x + (sx + 0.5f) * ssinv) * inv,
                                 (y + (sy + 0.5f) * ssinv) * inv};
                    const Rgb c = scene_color(state, p);
                    r += c.r;
                    g += c.g;
                    b += c.b;
                }
            float* px = im.at(y, x);
            constexpr float norm = 1.0f / (SS * SS);
            // quantize to byte steps so renders and stored frames agree exactly
            px[0] = std::lround(r * norm * 255.0f) * (1.0f / 255.0f);
            px[1] = std::lround(g * norm * 255.0f) * (1.0f / 255.0f);
            px[2] = std::lround(b * norm * 255.0f) * (1.0f / 255.0f);
        }
    return im;
}

// ---------------------------------------------------------------------------
// datasets

InstructionMix InstructionMix::uniform_over(std::vector<int> toks) {
    InstructionMix m;
    m.tokens = std::move(toks);
    return m;
}

InstructionMix InstructionMix::training_mix() {
    InstructionMix m = uniform_over(held_in_tokens());
    m.scene.allow_held_out_color = false;
    return m;
}

InstructionMix InstructionMix::eval_mix() {
    InstructionMix m = uniform_over(held_in_tokens());
    m.scene.allow_held_out_color = false;
    return m;
}

std::vector<TrajectoryActionsView> Dataset::view_a() const {
    std::vector<TrajectoryActionsView> out;
    out.reserve(trajs.size());
    for (const auto& t : trajs) out.push_back({&t.frames, &t.actions, t.success});
    return out;
}

std::vector<TrajectoryVideoView> Dataset::view_l() const {
    std::vector<TrajectoryVideoView> out;
    out.reserve(trajs.size());
    for (const auto& t : trajs) out.push_back({t.instr.token(), &t.frames, t.success});
    return out;
}

Dataset generate_dataset(int n_trajectories, std::uint64_t seed, const InstructionMix& mix) {
    if (n_trajectories < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (mix.tokens.empty()) throw std::invalid_argument("generate_dataset: empty instruction mix");
    if (!mix.weights.empty() && mix.weights.size() != mix.tokens.size())
        throw std::invalid_argument("generate_dataset: weights/tokens size mismatch");

    // draw instructions serially so the mix is reproducible, then roll out in
    // parallel with per-trajectory seeds
    Rng pick(derive_seed(seed, 0x313370ULL));
    std::vector<int> tokens(n_trajectories);
    for (auto& t : tokens) {
        if (mix.weights.empty()) {
            t = mix.tokens[static_cast<std::size_t>(
                pick.uniform_int(0, static_cast<std::int64_t>(mix.tokens.size()) - 1))];
        } else {
            double total = 0.0;
            for (double w : mix.weights) total += w;
            double u = pick.uniform() * total;
            std::size_t i = 0;
            while (i + 1 < mix.weights.size() && u >= mix.weights[i]) {
                u -= mix.weights[i];
                ++i;
            }
            t = mix.tokens[i];
        }
    }

    Dataset ds;
    ds.trajs.resize(n_trajectories);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_trajectories; ++i) {
        const Instruction in = Instruction::from_token(tokens[i]);
        ds.trajs[i] = rollout_expert(derive_seed(seed, 0x7247ULL, i), in, mix.scene);
    }
    return ds;
}

}  // namespace sglab

#include "sglab/proposer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sglab {

namespace {

// Beyond the training-augmentation ranges (0.1 / 0.2) at severity 1.
constexpr float kHueDriftMax = 0.15f;
constexpr float kBrightDriftMax = 0.30f;

struct ArtifactParams {
    float hue_shift = 0.0f;     // half-turns
    float bright_shift = 0.0f;
    float blur_mix = 0.0f;
    bool blob = false;
    float blob_cx = 0.0f, blob_cy = 0.0f, blob_r = 0.0f;
    float blob_rgb[3] = {0.0f, 0.0f, 0.0f};
};

ArtifactParams sample_artifacts(float severity, Rng& rng) {
    ArtifactParams p;
    p.hue_shift = (rng.bernoulli(0.5) ? 1.0f : -1.0f) * severity * kHueDriftMax;
    p.bright_shift = (rng.bernoulli(0.5) ? 1.0f : -1.0f) * severity * kBrightDriftMax;
    p.blur_mix = 0.5f * severity;
    if (rng.uniform() < severity * 0.5) {
        p.blob = true;
        p.blob_cx = rng.uniformf(2.0f, kImageSize - 2.0f);
        p.blob_cy = rng.uniformf(2.0f, kImageSize - 2.0f);
        p.blob_r = rng.uniformf(1.5f, 3.0f);  // 3-6 px blob
        for (auto& c : p.blob_rgb) c = rng.uniformf(0.0f, 1.0f);
    }
    return p;
}

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

ImageF apply_artifacts(const ImageF& image, const ArtifactParams& p) {
    ImageF im = image;
    const std::size_t npx = im.px.size() / 3;

    if (p.hue_shift != 0.0f) {
        const float shift = p.hue_shift * 0.5f;
        for (std::size_t i = 0; i < npx; ++i) {
            float* px = im.px.data() + i * 3;
            float hsv[3];
            rgb_to_hsv(px, hsv);
            hsv[0] += shift;
            hsv[0] -= std::floor(hsv[0]);
            hsv_to_rgb(hsv, px);
        }
    }
    for (auto& v : im.px) v = clamp01(v + p.bright_shift);

    if (p.blur_mix > 0.0f) {
        ImageF blurred(im.h, im.w);
        for (int y = 0; y < im.h; ++y)
            for (int x = 0; x < im.w; ++x)
                for (int c = 0; c < 3; ++c) {
                    float acc = 0.0f;
                    int cnt = 0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int yy = y + dy, xx = x + dx;
                            if (yy < 0 || yy >= im.h || xx < 0 || xx >= im.w) continue;
                            acc += im.at(yy, xx)[c];
                            ++cnt;
                        }
                    blurred.at(y, x)[c] = acc / static_cast<float>(cnt);
                }
        for (std::size_t i = 0; i < im.px.size(); ++i)
            im.px[i] = im.px[i] + p.blur_mix * (blurred.px[i] - im.px[i]);
    }

    if (p.blob) {
        const float r2 = p.blob_r * p.blob_r;
        for (int y = 0; y < im.h; ++y)
            for (int x = 0; x < im.w; ++x) {
                const float dx = x + 0.5f - p.blob_cx;
                const float dy = y + 0.5f - p.blob_cy;
                if (dx * dx + dy * dy <= r2) {
                    float* px = im.at(y, x);
                    for (int c = 0; c < 3; ++c) px[c] = p.blob_rgb[c];
                }
            }
    }
    return im;
}

// Instructions whose referents exist in the scene.
std::vector<int> achievable_tokens(const WorldState& state) {
    std::vector<int> out;
    for (const auto& o : state.objects)
        for (int k = 0; k < kNumContainers; ++k) {
            Instruction in;
            in.shape = o.shape;
            in.color = o.color;
            in.target = static_cast<ContainerKind>(k);
            out.push_back(in.token());
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

ImageF inject_artifacts(const ImageF& image, float severity, Rng& rng) {
    if (severity < 0.0f || severity > 1.0f)
        throw std::invalid_argument("inject_artifacts: severity must be in [0,1]");
    if (severity == 0.0f) return image;
    return apply_artifacts(image, sample_artifacts(severity, rng));
}

std::vector<SubgoalCandidate> propose(const ProposerConfig& cfg, const WorldState& state,
                                      const Instruction& instr, Rng& rng) {
    if (cfg.K < 1) throw std::invalid_argument("propose: K must be >= 1");
    const int horizon =
        cfg.mode == ProposerMode::ImageStyle ? cfg.subgoal_horizon : cfg.clip_length;

    std::vector<int> off_pool = achievable_tokens(state);
    off_pool.erase(std::remove(off_pool.begin(), off_pool.end(), instr.token()),
                   off_pool.end());

    std::vector<SubgoalCandidate> out;
    out.reserve(cfg.K);
    for (int i = 0; i < cfg.K; ++i) {
        SubgoalCandidate cand;
        cand.index = i;

        const bool off = !off_pool.empty() && rng.uniform() < cfg.p_off_task;
        Instruction roll_instr = instr;
        if (off) {
            roll_instr = Instruction::from_token(off_pool[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(off_pool.size()) - 1))]);
            cand.provenance = Provenance::OffTask;
            cand.actual_token = roll_instr.token();
        } else {
            cand.provenance = Provenance::OnTask;
            cand.actual_token = instr.token();
        }
        cand.artifact_severity = cfg.severity_max > cfg.severity_min
                                     ? rng.uniformf(cfg.severity_min, cfg.severity_max)
                                     : cfg.severity_min;

        // noise-free expert roll; an OnTask candidate at severity 0 is the
        // exact render of the reachable future state
        WorldState st = state;
        for (int t = 0; t < horizon; ++t) {
            st = step(st, expert_action(st, roll_instr, nullptr));
            if (cfg.mode == ProposerMode::VideoStyle) cand.frames.push_back(render(st));
        }
        if (cfg.mode == ProposerMode::ImageStyle) cand.frames.push_back(render(st));

        if (cand.artifact_severity > 0.0f) {
            // one artifact realization per candidate, applied to every frame
            const ArtifactParams ap = sample_artifacts(cand.artifact_severity, rng);
            for (auto& f : cand.frames) f = apply_artifacts(f, ap);
        }
        out.push_back(std::move(cand));
    }
    return out;
}

// ---------------------------------------------------------------------------
// external candidates

namespace {

ImageF load_raw_rgb(const std::filesystem::path& path) {
    constexpr std::size_t kBytes = static_cast<std::size_t>(kImageSize) * kImageSize * 3;
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("external candidate file not found: " + path.string());
    Image8 raw(kImageSize, kImageSize);
    is.read(reinterpret_cast<char*>(raw.px.data()), static_cast<std::streamsize>(kBytes));
    if (static_cast<std::size_t>(is.gcount()) != kBytes || is.peek() != EOF)
        throw std::runtime_error("external candidate '" + path.string() +
                                 "' is not a raw 32x32x3 byte image");
    return dequantize(raw);
}

}  // namespace

std::vector<SubgoalCandidate> load_external_candidates(const std::string& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw std::runtime_error("cannot open candidate manifest '" + manifest_path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed candidate manifest '" + manifest_path +
                                 "': " + e.what());
    }
    if (!j.contains("mode") || !j.contains("candidates"))
        throw std::runtime_error("candidate manifest '" + manifest_path +
                                 "' needs 'mode' and 'candidates'");
    const std::string mode = j["mode"].get<std::string>();
    if (mode != "image" && mode != "video")
        throw std::runtime_error("candidate manifest mode must be 'image' or 'video'");
    const auto base = std::filesystem::path(manifest_path).parent_path();

    std::vector<SubgoalCandidate> out;
    int index = 0;
    for (const auto& entry : j["candidates"]) {
        const std::filesystem::path p = base / entry.get<std::string>();
        SubgoalCandidate cand;
        cand.index = index++;
        cand.provenance = Provenance::Unknown;
        if (mode == "image") {
            cand.frames.push_back(load_raw_rgb(p));
        } else {
            if (!std::filesystem::is_directory(p))
                throw std::runtime_error("video candidate is not a directory: " + p.string());
            std::vector<std::filesystem::path> files;
            for (const auto& f : std::filesystem::directory_iterator(p))
                if (f.is_regular_file()) files.push_back(f.path());
            std::sort(files.begin(), files.end());
            if (static_cast<int>(files.size()) != 16)
                throw std::runtime_error("video candidate '" + p.string() + "': expected 16 frames, found " +
                                         std::to_string(files.size()));
            for (const auto& f : files) cand.frames.push_back(load_raw_rgb(f));
        }
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace sglab

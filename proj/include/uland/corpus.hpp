#pragma once
// Synthetic video corpus: a bright ribbon between two endpoint landmarks whose
// contrast follows a periodic visibility cycle. Exactly one key frame per video
// carries a (noisy) landmark label; the full key-frame set is kept for
// evaluation only.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "uland/common.hpp"

namespace uland::corpus {

struct Frame {
    int h = 0, w = 0;
    std::vector<float> px;  // row-major, values in [0,1]

    Frame() = default;
    Frame(int height, int width) : h(height), w(width), px(static_cast<size_t>(height) * width, 0.0f) {}
    float at(int r, int c) const { return px[static_cast<size_t>(r) * w + c]; }
    float& at(int r, int c) { return px[static_cast<size_t>(r) * w + c]; }
};

struct LandmarkLabel {
    std::vector<Point> points;  // exactly tau (= 2) sub-pixel coordinates
    double length_gt = 0.0;     // euclidean distance between the points, in mm
};

struct GeneratorConfig {
    int height = 64, width = 64;
    int frames_min = 24, frames_max = 60;
    double cycle_period = 16.0;  // frames per visibility cycle
    double gamma = 2.0;          // visibility sharpness exponent
    double v_key = 0.85;         // key-frame visibility threshold
    double label_noise_std = 0.5;  // px, mimics noisy clinical labels
    int key_jitter = 1;            // labeled index jitter, in K-members
    double pixel_spacing = 0.5;    // mm per pixel
    int tau = 2;

    // appearance
    double background = 0.08;
    double ribbon_sigma = 1.6;       // cross-section falloff, px
    double endpoint_sigma = 2.2;     // endpoint bump falloff, px
    double endpoint_gain = 1.25;     // endpoint brightness relative to ribbon
    double length_frac_min = 0.35;   // endpoint separation as fraction of width
    double length_frac_max = 0.70;
    double length_modulation = 0.20;  // apparent shrink at low visibility
    double contrast_min = 0.65, contrast_max = 1.0;
    double speckle_std = 0.10;  // multiplicative noise

    // distractor blobs, present on every frame, random-walk motion
    int distractors_min = 1, distractors_max = 3;
    double distractor_amp_min = 0.30, distractor_amp_max = 0.80;
    double distractor_sigma_min = 1.6, distractor_sigma_max = 3.0;
    double distractor_walk_std = 1.0;

    // low-quality videos: dim ribbon everywhere, heavier speckle
    double hard_fraction = 0.12;
    double hard_contrast_min = 0.10, hard_contrast_max = 0.22;
    double hard_speckle_std = 0.18;

    void validate() const;  // throws ConfigError
};

// Deterministic geometry of one video: everything except per-frame noise.
struct VideoPlan {
    int frames = 0;
    double phase = 0.0;
    double period = 16.0;
    double gamma = 2.0;
    Point end_a, end_b;  // endpoints at full visibility
    double contrast = 1.0;
    double speckle = 0.1;
    bool hard = false;
    struct Distractor {
        double amp = 0.0, sigma = 1.0;
        std::vector<Point> track;  // one position per frame
    };
    std::vector<Distractor> distractors;

    double visibility(int t) const;  // max(0, cos(2pi (t-phase)/T))^gamma
    std::pair<Point, Point> endpoints_at(int t, const GeneratorConfig& cfg) const;
};

VideoPlan make_video_plan(const GeneratorConfig& cfg, uint64_t seed);
// Additive ribbon layer only (no background, distractors or noise).
void render_ribbon_layer(const VideoPlan& plan, const GeneratorConfig& cfg, int t, Frame& out);
Frame render_frame(const VideoPlan& plan, const GeneratorConfig& cfg, int t, uint64_t seed);

// Read instrumentation; shared between copies of a video (test-only bookkeeping).
struct AccessStats {
    std::vector<std::atomic<uint32_t>> frame_reads;
    std::atomic<uint32_t> key_index_reads{0};
    std::atomic<uint32_t> key_set_reads{0};
    std::atomic<uint32_t> label_reads{0};

    explicit AccessStats(size_t n_frames) : frame_reads(n_frames) {}
    void reset() {
        for (auto& a : frame_reads) a.store(0);
        key_index_reads.store(0);
        key_set_reads.store(0);
        label_reads.store(0);
    }
};

class SyntheticVideo {
  public:
    SyntheticVideo() = default;
    SyntheticVideo(std::string id, std::vector<Frame> frames, int labeled_key_index,
                   LandmarkLabel label, std::vector<int> key_set, double pixel_spacing,
                   uint64_t seed);

    const std::string& id() const { return id_; }
    int frame_count() const { return static_cast<int>(frames_.size()); }
    int height() const { return frames_.empty() ? 0 : frames_[0].h; }
    int width() const { return frames_.empty() ? 0 : frames_[0].w; }
    double pixel_spacing() const { return pixel_spacing_; }
    uint64_t seed() const { return seed_; }

    const Frame& frame(int t) const;

    // Ground-truth accessors are instrumented so tests can assert that the
    // fully automatic path never touches them.
    int labeled_key_index() const;
    const std::vector<int>& key_set() const;
    const LandmarkLabel& label() const;

    AccessStats& access_stats() const { return *stats_; }

  private:
    std::string id_;
    std::vector<Frame> frames_;
    int labeled_key_index_ = 0;
    LandmarkLabel label_;
    std::vector<int> key_set_;
    double pixel_spacing_ = 1.0;
    uint64_t seed_ = 0;
    std::shared_ptr<AccessStats> stats_;
};

struct Corpus {
    std::vector<SyntheticVideo> train;
    std::vector<SyntheticVideo> calib;  // X_calib
    std::vector<SyntheticVideo> test;
    GeneratorConfig generation_config;
};

SyntheticVideo generate_video(const GeneratorConfig& cfg, uint64_t seed, std::string id = "");
Corpus generate_corpus(const GeneratorConfig& cfg, int n_videos, uint64_t master_seed);

// Directory layout: manifest.json + one <id>.ulvd per video
// (magic "ULVD1", u32le P,H,W, then P*H*W float32le pixels, row-major).
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir);

struct SplitSizes {
    int train = 0, calib = 0, test = 0;
};
SplitSizes split_sizes(int n_videos);  // throws GenerationError when a split would be empty

}  // namespace uland::corpus

#include "uland/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "uland/parallel.hpp"
#include "uland/rng.hpp"

namespace uland::corpus {

using json = nlohmann::ordered_json;

void GeneratorConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("generator config: " + what); };
    if (height < 16 || width < 16) fail("height and width must be >= 16");
    if (frames_min < 2 || frames_max < frames_min) fail("invalid [frames_min, frames_max]");
    if (cycle_period < 8.0) fail("cycle_period must be >= 8 frames");
    if (!(v_key > 0.0 && v_key < 1.0)) fail("v_key must be in (0,1)");
    if (gamma <= 0.0) fail("gamma must be > 0");
    if (label_noise_std < 0.0) fail("label_noise_std must be >= 0");
    if (key_jitter < 0) fail("key_jitter must be >= 0");
    if (pixel_spacing <= 0.0) fail("pixel_spacing must be > 0");
    if (tau != 2) fail("tau must be 2 (two-endpoint measurement)");
    if (length_frac_min <= 0.0 || length_frac_max > 0.95 || length_frac_max < length_frac_min)
        fail("invalid [length_frac_min, length_frac_max]");
    if (length_modulation < 0.0 || length_modulation >= 1.0) fail("length_modulation must be in [0,1)");
    if (distractors_min < 1 || distractors_max < distractors_min) fail("invalid distractor counts");
    if (speckle_std < 0.0 || hard_speckle_std < 0.0) fail("speckle std must be >= 0");
    if (hard_fraction < 0.0 || hard_fraction > 1.0) fail("hard_fraction must be in [0,1]");
    if (contrast_min <= 0.0 || contrast_max < contrast_min) fail("invalid contrast range");
    if (hard_contrast_min <= 0.0 || hard_contrast_max < hard_contrast_min) fail("invalid hard contrast range");
}

double VideoPlan::visibility(int t) const {
    double c = std::cos(2.0 * std::numbers::pi * (t - phase) / period);
    if (c <= 0.0) return 0.0;
    return std::pow(c, gamma);
}

std::pair<Point, Point> VideoPlan::endpoints_at(int t, const GeneratorConfig& cfg) const {
    // The apparent separation shrinks away from peak visibility; labels are
    // taken at (or near) the peak, so the labeled frame carries the full length.
    double s = 1.0 - cfg.length_modulation * (1.0 - visibility(t));
    Point mid{0.5 * (end_a.row + end_b.row), 0.5 * (end_a.col + end_b.col)};
    Point half{0.5 * (end_b.row - end_a.row) * s, 0.5 * (end_b.col - end_a.col) * s};
    return {Point{mid.row - half.row, mid.col - half.col},
            Point{mid.row + half.row, mid.col + half.col}};
}

VideoPlan make_video_plan(const GeneratorConfig& cfg, uint64_t seed) {
    VideoPlan plan;
    plan.period = cfg.cycle_period;
    plan.gamma = cfg.gamma;

    rng::Stream geo(rng::derive(seed, rng::tag("geometry")));
    plan.frames = geo.uniform_int(cfg.frames_min, cfg.frames_max);
    plan.phase = geo.uniform(0.0, cfg.cycle_period);

    // Endpoint segment: random center offset and orientation, separation drawn
    // as a fraction of the width so ground-truth lengths vary across videos.
    double len_px = geo.uniform(cfg.length_frac_min, cfg.length_frac_max) * cfg.width;
    double angle = geo.uniform(0.0, std::numbers::pi);
    double margin = 0.12 * std::min(cfg.height, cfg.width) + 2.0;
    double cr = 0.5 * cfg.height + geo.uniform(-0.08, 0.08) * cfg.height;
    double cc = 0.5 * cfg.width + geo.uniform(-0.08, 0.08) * cfg.width;
    double dr = 0.5 * len_px * std::sin(angle);
    double dc = 0.5 * len_px * std::cos(angle);
    auto clamp_pt = [&](double r, double c) {
        return Point{std::clamp(r, margin, cfg.height - 1.0 - margin),
                     std::clamp(c, margin, cfg.width - 1.0 - margin)};
    };
    plan.end_a = clamp_pt(cr - dr, cc - dc);
    plan.end_b = clamp_pt(cr + dr, cc + dc);

    rng::Stream quality(rng::derive(seed, rng::tag("quality")));
    plan.hard = quality.uniform(0.0, 1.0) < cfg.hard_fraction;
    if (plan.hard) {
        plan.contrast = quality.uniform(cfg.hard_contrast_min, cfg.hard_contrast_max);
        plan.speckle = cfg.hard_speckle_std;
    } else {
        plan.contrast = quality.uniform(cfg.contrast_min, cfg.contrast_max);
        plan.speckle = cfg.speckle_std;
    }

    int n_distractors = quality.uniform_int(cfg.distractors_min, cfg.distractors_max);
    plan.distractors.resize(static_cast<size_t>(n_distractors));
    for (int d = 0; d < n_distractors; ++d) {
        auto& dis = plan.distractors[static_cast<size_t>(d)];
        rng::Stream ds(rng::derive(seed, rng::tag("distractor"), static_cast<uint64_t>(d)));
        dis.amp = ds.uniform(cfg.distractor_amp_min, cfg.distractor_amp_max);
        dis.sigma = ds.uniform(cfg.distractor_sigma_min, cfg.distractor_sigma_max);
        double r = ds.uniform(margin, cfg.height - 1.0 - margin);
        double c = ds.uniform(margin, cfg.width - 1.0 - margin);
        dis.track.resize(static_cast<size_t>(plan.frames));
        for (int t = 0; t < plan.frames; ++t) {
            dis.track[static_cast<size_t>(t)] = Point{r, c};
            r = std::clamp(r + ds.normal(0.0, cfg.distractor_walk_std), 2.0, cfg.height - 3.0);
            c = std::clamp(c + ds.normal(0.0, cfg.distractor_walk_std), 2.0, cfg.width - 3.0);
        }
    }
    return plan;
}

namespace {

// Distance from pixel p to segment [a,b].
double segment_distance(double pr, double pc, const Point& a, const Point& b) {
    double vr = b.row - a.row, vc = b.col - a.col;
    double wr = pr - a.row, wc = pc - a.col;
    double vv = vr * vr + vc * vc;
    double u = vv > 0.0 ? std::clamp((wr * vr + wc * vc) / vv, 0.0, 1.0) : 0.0;
    double dr = wr - u * vr, dc = wc - u * vc;
    return std::sqrt(dr * dr + dc * dc);
}

void add_gaussian_bump(Frame& f, const Point& center, double amp, double sigma) {
    if (amp <= 0.0) return;
    int r0 = std::max(0, static_cast<int>(std::floor(center.row - 4.0 * sigma)));
    int r1 = std::min(f.h - 1, static_cast<int>(std::ceil(center.row + 4.0 * sigma)));
    int c0 = std::max(0, static_cast<int>(std::floor(center.col - 4.0 * sigma)));
    int c1 = std::min(f.w - 1, static_cast<int>(std::ceil(center.col + 4.0 * sigma)));
    double inv = 1.0 / (2.0 * sigma * sigma);
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            double dr = r - center.row, dc = c - center.col;
            f.at(r, c) += static_cast<float>(amp * std::exp(-(dr * dr + dc * dc) * inv));
        }
}

}  // namespace

void render_ribbon_layer(const VideoPlan& plan, const GeneratorConfig& cfg, int t, Frame& out) {
    out = Frame(cfg.height, cfg.width);
    double v = plan.visibility(t);
    double amp = plan.contrast * v;
    if (amp <= 0.0) return;
    auto [a, b] = plan.endpoints_at(t, cfg);
    double inv = 1.0 / (2.0 * cfg.ribbon_sigma * cfg.ribbon_sigma);
    double reach = 4.0 * std::max(cfg.ribbon_sigma, cfg.endpoint_sigma);
    int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.row, b.row) - reach)));
    int r1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(std::max(a.row, b.row) + reach)));
    int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.col, b.col) - reach)));
    int c1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(std::max(a.col, b.col) + reach)));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            double d = segment_distance(r, c, a, b);
            out.at(r, c) += static_cast<float>(amp * std::exp(-d * d * inv));
        }
    add_gaussian_bump(out, a, amp * (cfg.endpoint_gain - 1.0), cfg.endpoint_sigma);
    add_gaussian_bump(out, b, amp * (cfg.endpoint_gain - 1.0), cfg.endpoint_sigma);
}

Frame render_frame(const VideoPlan& plan, const GeneratorConfig& cfg, int t, uint64_t seed) {
    Frame f;
    render_ribbon_layer(plan, cfg, t, f);
    for (auto& v : f.px) v += static_cast<float>(cfg.background);
    for (const auto& dis : plan.distractors)
        add_gaussian_bump(f, dis.track[static_cast<size_t>(t)], dis.amp, dis.sigma);
    rng::Stream noise(rng::derive(seed, rng::tag("speckle"), static_cast<uint64_t>(t)));
    for (auto& v : f.px) {
        double n = 1.0 + plan.speckle * noise.normal();
        v = static_cast<float>(std::clamp(static_cast<double>(v) * std::max(0.0, n), 0.0, 1.0));
    }
    return f;
}

SyntheticVideo::SyntheticVideo(std::string id, std::vector<Frame> frames, int labeled_key_index,
                               LandmarkLabel label, std::vector<int> key_set, double pixel_spacing,
                               uint64_t seed)
    : id_(std::move(id)),
      frames_(std::move(frames)),
      labeled_key_index_(labeled_key_index),
      label_(std::move(label)),
      key_set_(std::move(key_set)),
      pixel_spacing_(pixel_spacing),
      seed_(seed),
      stats_(std::make_shared<AccessStats>(frames_.size())) {}

const Frame& SyntheticVideo::frame(int t) const {
    if (t < 0 || t >= frame_count()) throw InvalidArgument("frame index out of range for video " + id_);
    stats_->frame_reads[static_cast<size_t>(t)].fetch_add(1, std::memory_order_relaxed);
    return frames_[static_cast<size_t>(t)];
}

int SyntheticVideo::labeled_key_index() const {
    stats_->key_index_reads.fetch_add(1, std::memory_order_relaxed);
    return labeled_key_index_;
}

const std::vector<int>& SyntheticVideo::key_set() const {
    stats_->key_set_reads.fetch_add(1, std::memory_order_relaxed);
    return key_set_;
}

const LandmarkLabel& SyntheticVideo::label() const {
    stats_->label_reads.fetch_add(1, std::memory_order_relaxed);
    return label_;
}

SyntheticVideo generate_video(const GeneratorConfig& cfg, uint64_t seed, std::string id) {
    cfg.validate();
    VideoPlan plan = make_video_plan(cfg, seed);

    std::vector<int> key_set;
    int k0 = 0;
    double vmax = -1.0;
    for (int t = 0; t < plan.frames; ++t) {
        double v = plan.visibility(t);
        if (v >= cfg.v_key) key_set.push_back(t);
        if (v > vmax) {
            vmax = v;
            k0 = t;
        }
    }
    if (key_set.empty())
        throw GenerationError("no frame reaches v_key=" + std::to_string(cfg.v_key) +
                              " (gamma too sharp or threshold too high)");

    int k = k0;
    if (cfg.key_jitter > 0) {
        rng::Stream js(rng::derive(seed, rng::tag("key_jitter")));
        auto it = std::lower_bound(key_set.begin(), key_set.end(), k0);
        int idx = static_cast<int>(it - key_set.begin());
        int off = js.uniform_int(-cfg.key_jitter, cfg.key_jitter);
        idx = std::clamp(idx + off, 0, static_cast<int>(key_set.size()) - 1);
        k = key_set[static_cast<size_t>(idx)];
    }

    auto [a, b] = plan.endpoints_at(k, cfg);
    rng::Stream ls(rng::derive(seed, rng::tag("label_noise")));
    auto noisy = [&](const Point& p) {
        double r = p.row, c = p.col;
        if (cfg.label_noise_std > 0.0) {
            r += ls.normal(0.0, cfg.label_noise_std);
            c += ls.normal(0.0, cfg.label_noise_std);
        }
        return Point{std::clamp(r, 0.5, cfg.height - 1.5), std::clamp(c, 0.5, cfg.width - 1.5)};
    };
    LandmarkLabel label;
    label.points = {noisy(a), noisy(b)};
    double dr = label.points[1].row - label.points[0].row;
    double dc = label.points[1].col - label.points[0].col;
    label.length_gt = std::sqrt(dr * dr + dc * dc) * cfg.pixel_spacing;

    std::vector<Frame> frames(static_cast<size_t>(plan.frames));
    for (int t = 0; t < plan.frames; ++t) frames[static_cast<size_t>(t)] = render_frame(plan, cfg, t, seed);

    return SyntheticVideo(std::move(id), std::move(frames), k, std::move(label), std::move(key_set),
                          cfg.pixel_spacing, seed);
}

SplitSizes split_sizes(int n_videos) {
    if (n_videos < 10)
        throw GenerationError("n_videos=" + std::to_string(n_videos) + " too small to populate all splits");
    SplitSizes s;
    s.test = std::max(1, static_cast<int>(std::floor(0.10 * n_videos)));
    int pool = n_videos - s.test;
    s.calib = std::max(1, static_cast<int>(std::floor(0.10 * pool)));
    s.train = n_videos - s.test - s.calib;
    if (s.train < 1) throw GenerationError("n_videos too small to populate all splits");
    return s;
}

Corpus generate_corpus(const GeneratorConfig& cfg, int n_videos, uint64_t master_seed) {
    cfg.validate();
    SplitSizes sizes = split_sizes(n_videos);

    std::vector<SyntheticVideo> videos(static_cast<size_t>(n_videos));
    parallel_for(n_videos, [&](int i) {
        char id[16];
        std::snprintf(id, sizeof(id), "v%04d", i);
        uint64_t seed = rng::derive(master_seed, rng::tag("video"), static_cast<uint64_t>(i));
        videos[static_cast<size_t>(i)] = generate_video(cfg, seed, id);
    });

    Corpus corpus;
    corpus.generation_config = cfg;
    corpus.train.assign(videos.begin(), videos.begin() + sizes.train);
    corpus.calib.assign(videos.begin() + sizes.train, videos.begin() + sizes.train + sizes.calib);
    corpus.test.assign(videos.begin() + sizes.train + sizes.calib, videos.end());
    return corpus;
}

namespace {

json config_to_json(const GeneratorConfig& c) {
    return json{{"height", c.height},
                {"width", c.width},
                {"frames_min", c.frames_min},
                {"frames_max", c.frames_max},
                {"cycle_period", c.cycle_period},
                {"gamma", c.gamma},
                {"v_key", c.v_key},
                {"label_noise_std", c.label_noise_std},
                {"key_jitter", c.key_jitter},
                {"pixel_spacing", c.pixel_spacing},
                {"tau", c.tau},
                {"background", c.background},
                {"ribbon_sigma", c.ribbon_sigma},
                {"endpoint_sigma", c.endpoint_sigma},
                {"endpoint_gain", c.endpoint_gain},
                {"length_frac_min", c.length_frac_min},
                {"length_frac_max", c.length_frac_max},
                {"length_modulation", c.length_modulation},
                {"contrast_min", c.contrast_min},
                {"contrast_max", c.contrast_max},
                {"speckle_std", c.speckle_std},
                {"distractors_min", c.distractors_min},
                {"distractors_max", c.distractors_max},
                {"distractor_amp_min", c.distractor_amp_min},
                {"distractor_amp_max", c.distractor_amp_max},
                {"distractor_sigma_min", c.distractor_sigma_min},
                {"distractor_sigma_max", c.distractor_sigma_max},
                {"distractor_walk_std", c.distractor_walk_std},
                {"hard_fraction", c.hard_fraction},
                {"hard_contrast_min", c.hard_contrast_min},
                {"hard_contrast_max", c.hard_contrast_max},
                {"hard_speckle_std", c.hard_speckle_std}};
}

GeneratorConfig config_from_json(const json& j) {
    GeneratorConfig c;
    c.height = j.at("height").get<int>();
    c.width = j.at("width").get<int>();
    c.frames_min = j.at("frames_min").get<int>();
    c.frames_max = j.at("frames_max").get<int>();
    c.cycle_period = j.at("cycle_period").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.v_key = j.at("v_key").get<double>();
    c.label_noise_std = j.at("label_noise_std").get<double>();
    c.key_jitter = j.at("key_jitter").get<int>();
    c.pixel_spacing = j.at("pixel_spacing").get<double>();
    c.tau = j.at("tau").get<int>();
    c.background = j.at("background").get<double>();
    c.ribbon_sigma = j.at("ribbon_sigma").get<double>();
    c.endpoint_sigma = j.at("endpoint_sigma").get<double>();
    c.endpoint_gain = j.at("endpoint_gain").get<double>();
    c.length_frac_min = j.at("length_frac_min").get<double>();
    c.length_frac_max = j.at("length_frac_max").get<double>();
    c.length_modulation = j.at("length_modulation").get<double>();
    c.contrast_min = j.at("contrast_min").get<double>();
    c.contrast_max = j.at("contrast_max").get<double>();
    c.speckle_std = j.at("speckle_std").get<double>();
    c.distractors_min = j.at("distractors_min").get<int>();
    c.distractors_max = j.at("distractors_max").get<int>();
    c.distractor_amp_min = j.at("distractor_amp_min").get<double>();
    c.distractor_amp_max = j.at("distractor_amp_max").get<double>();
    c.distractor_sigma_min = j.at("distractor_sigma_min").get<double>();
    c.distractor_sigma_max = j.at("distractor_sigma_max").get<double>();
    c.distractor_walk_std = j.at("distractor_walk_std").get<double>();
    c.hard_fraction = j.at("hard_fraction").get<double>();
    c.hard_contrast_min = j.at("hard_contrast_min").get<double>();
    c.hard_contrast_max = j.at("hard_contrast_max").get<double>();
    c.hard_speckle_std = j.at("hard_speckle_std").get<double>();
    return c;
}

constexpr char kVideoMagic[5] = {'U', 'L', 'V', 'D', '1'};

void write_video_tensor(const SyntheticVideo& v, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out.write(kVideoMagic, 5);
    uint32_t dims[3] = {static_cast<uint32_t>(v.frame_count()), static_cast<uint32_t>(v.height()),
                        static_cast<uint32_t>(v.width())};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (int t = 0; t < v.frame_count(); ++t) {
        const Frame& f = v.frame(t);
        out.write(reinterpret_cast<const char*>(f.px.data()),
                  static_cast<std::streamsize>(f.px.size() * sizeof(float)));
    }
    if (!out) throw FormatError("short write: " + path.string());
}

std::vector<Frame> read_video_tensor(const std::filesystem::path& path, int expect_p, int expect_h,
                                     int expect_w) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open video tensor: " + path.string());
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kVideoMagic, 5) != 0)
        throw FormatError("bad magic in " + path.string() + " (expected ULVD1)");
    uint32_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw FormatError("truncated header in " + path.string());
    if (static_cast<int>(dims[0]) != expect_p)
        throw FormatError("frame count mismatch in " + path.string() + ": manifest P=" +
                          std::to_string(expect_p) + ", tensor P=" + std::to_string(dims[0]));
    if (static_cast<int>(dims[1]) != expect_h || static_cast<int>(dims[2]) != expect_w)
        throw FormatError("frame size mismatch in " + path.string());
    std::vector<Frame> frames(dims[0], Frame(static_cast<int>(dims[1]), static_cast<int>(dims[2])));
    for (auto& f : frames) {
        in.read(reinterpret_cast<char*>(f.px.data()),
                static_cast<std::streamsize>(f.px.size() * sizeof(float)));
        if (!in) throw FormatError("truncated pixel payload in " + path.string());
    }
    return frames;
}

json video_record(const SyntheticVideo& v, const std::string& split) {
    json pts = json::array();
    for (const auto& p : v.label().points) pts.push_back(json::array({p.row, p.col}));
    return json{{"id", v.id()},
                {"split", split},
                {"seed", v.seed()},
                {"P", v.frame_count()},
                {"H", v.height()},
                {"W", v.width()},
                {"k", v.labeled_key_index()},
                {"K", v.key_set()},
                {"pixel_spacing", v.pixel_spacing()},
                {"label", json{{"points", pts}, {"length_gt", v.label().length_gt}}}};
}

SyntheticVideo video_from_record(const json& rec, const std::filesystem::path& dir) {
    const std::string id = rec.at("id").get<std::string>();
    int p = rec.at("P").get<int>();
    int h = rec.at("H").get<int>();
    int w = rec.at("W").get<int>();
    auto frames = read_video_tensor(dir / (id + ".ulvd"), p, h, w);
    LandmarkLabel label;
    for (const auto& pt : rec.at("label").at("points"))
        label.points.push_back(Point{pt.at(0).get<double>(), pt.at(1).get<double>()});
    label.length_gt = rec.at("label").at("length_gt").get<double>();
    std::vector<int> key_set = rec.at("K").get<std::vector<int>>();
    int k = rec.at("k").get<int>();
    if (std::find(key_set.begin(), key_set.end(), k) == key_set.end())
        throw FormatError("manifest video " + id + ": k not a member of K");
    return SyntheticVideo(id, std::move(frames), k, std::move(label), std::move(key_set),
                          rec.at("pixel_spacing").get<double>(), rec.at("seed").get<uint64_t>());
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["generation_config"] = config_to_json(corpus.generation_config);
    json videos = json::array();
    auto emit = [&](const std::vector<SyntheticVideo>& vs, const char* split) {
        for (const auto& v : vs) {
            videos.push_back(video_record(v, split));
            write_video_tensor(v, dir / (v.id() + ".ulvd"));
        }
    };
    emit(corpus.train, "train");
    emit(corpus.calib, "calib");
    emit(corpus.test, "test");
    manifest["videos"] = std::move(videos);
    std::ofstream out(dir / "manifest.json");
    if (!out) throw FormatError("cannot write manifest: " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
}

Corpus read_corpus(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw FormatError("cannot open manifest: " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest.json: " + std::string(e.what()));
    }
    Corpus corpus;
    try {
        corpus.generation_config = config_from_json(manifest.at("generation_config"));
        for (const auto& rec : manifest.at("videos")) {
            std::string split = rec.at("split").get<std::string>();
            SyntheticVideo v = video_from_record(rec, dir);
            if (split == "train")
                corpus.train.push_back(std::move(v));
            else if (split == "calib")
                corpus.calib.push_back(std::move(v));
            else if (split == "test")
                corpus.test.push_back(std::move(v));
            else
                throw FormatError("manifest: unknown split '" + split + "'");
        }
    } catch (const json::exception& e) {
        throw FormatError("manifest.json missing/invalid field: " + std::string(e.what()));
    }
    return corpus;
}

}  // namespace uland::corpus

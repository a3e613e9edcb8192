#include "seedvos/feature_store.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos {

using nlohmann::json;

namespace {

constexpr float kObjectnessSlack = 1e-6f;

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& base, const fs::path& p) {
    std::error_code ec;
    fs::path rel = fs::relative(p, base, ec);
    return (ec || rel.empty()) ? p.string() : rel.generic_string();
}

std::string frame_tag(std::size_t k) { return "frame " + std::to_string(k); }

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) fail(ErrorCode::FileNotFound, what + " file not found: " + p.string());
}

}  // namespace

bool Sequence::has_full_gt() const {
    return !gt.empty() && std::all_of(gt.begin(), gt.end(), [](const auto& g) { return g.has_value(); });
}

std::vector<BinaryMask> Sequence::gt_masks() const {
    if (!has_full_gt()) fail(ErrorCode::InvalidArgument, "sequence '" + name + "' lacks ground truth for some frames");
    std::vector<BinaryMask> out;
    out.reserve(gt.size());
    for (const auto& g : gt) out.push_back(*g);
    return out;
}

SequenceManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileNotFound, "manifest not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, path.string() + ": invalid JSON: " + e.what());
    }
    const fs::path base = path.parent_path();
    SequenceManifest m;
    m.name = doc.value("name", path.parent_path().filename().string());
    if (!doc.contains("frames") || !doc["frames"].is_array() || doc["frames"].empty()) {
        fail(ErrorCode::InvalidArgument, path.string() + ": manifest needs a non-empty 'frames' array");
    }
    try {
        for (const auto& f : doc["frames"]) {
            FrameEntry e;
            e.embedding = resolve(base, f.at("embedding").get<std::string>());
            e.objectness = resolve(base, f.at("objectness").get<std::string>());
            e.flow = resolve(base, f.at("flow").get<std::string>());
            if (f.contains("rgb")) e.rgb = resolve(base, f["rgb"].get<std::string>());
            if (f.contains("gt")) e.gt = resolve(base, f["gt"].get<std::string>());
            m.frames.push_back(std::move(e));
        }
        if (doc.contains("annotation0")) m.annotation0 = resolve(base, doc["annotation0"].get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, path.string() + ": bad frame entry: " + e.what());
    }
    return m;
}

void save_manifest(const SequenceManifest& manifest, const fs::path& path) {
    const fs::path base = path.parent_path();
    json doc;
    doc["name"] = manifest.name;
    doc["frames"] = json::array();
    for (const auto& f : manifest.frames) {
        json e;
        e["embedding"] = relative_to(base, f.embedding);
        e["objectness"] = relative_to(base, f.objectness);
        e["flow"] = relative_to(base, f.flow);
        if (f.rgb) e["rgb"] = relative_to(base, *f.rgb);
        if (f.gt) e["gt"] = relative_to(base, *f.gt);
        doc["frames"].push_back(std::move(e));
    }
    if (manifest.annotation0) doc["annotation0"] = relative_to(base, *manifest.annotation0);
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
}

void validate_sequence(const Sequence& seq) {
    if (seq.frames.empty()) fail(ErrorCode::InvalidArgument, "sequence has no frames");
    const std::size_t h = seq.height(), w = seq.width(), e = seq.embedding_dim();
    for (std::size_t k = 0; k < seq.frames.size(); ++k) {
        const auto& f = seq.frames[k];
        auto check = [&](bool ok, const std::string& what) {
            if (!ok) fail(ErrorCode::DimensionMismatch, frame_tag(k) + ": " + what);
        };
        check(f.embedding.height() == h && f.embedding.width() == w,
              "embedding is " + std::to_string(f.embedding.height()) + "x" + std::to_string(f.embedding.width()) +
                  ", expected " + std::to_string(h) + "x" + std::to_string(w));
        check(f.embedding.channels() == e, "embedding channel count differs from frame 0");
        check(f.objectness.height() == h && f.objectness.width() == w, "objectness size differs from embedding");
        check(f.objectness.channels() == 1, "objectness must have one channel");
        check(f.flow.height() == h && f.flow.width() == w, "flow size differs from embedding");
        check(f.flow.channels() == 2, "flow must have exactly two channels");
        if (f.rgb) check(f.rgb->height == h && f.rgb->width == w, "rgb size differs from embedding");
        for (float o : f.objectness.data()) {
            if (o < 0.0f || o > 1.0f) fail(ErrorCode::InvalidValue, frame_tag(k) + ": objectness outside [0,1]");
        }
        if (k < seq.gt.size() && seq.gt[k]) {
            check(seq.gt[k]->height() == h && seq.gt[k]->width() == w, "ground-truth mask size differs");
        }
    }
    if (seq.annotation0) {
        if (seq.annotation0->height() != h || seq.annotation0->width() != w) {
            fail(ErrorCode::DimensionMismatch, "annotation0 size differs from the sequence");
        }
    }
}

Sequence load_sequence(const SequenceManifest& manifest) {
    Sequence seq;
    seq.name = manifest.name;
    const std::size_t n = manifest.frames.size();
    if (n == 0) fail(ErrorCode::InvalidArgument, "manifest lists no frames");
    for (const auto& f : manifest.frames) {
        require_file(f.embedding, "embedding");
        require_file(f.objectness, "objectness");
        require_file(f.flow, "flow");
        if (f.rgb) require_file(*f.rgb, "rgb");
        if (f.gt) require_file(*f.gt, "ground-truth");
    }
    if (manifest.annotation0) require_file(*manifest.annotation0, "annotation0");

    seq.frames.resize(n);
    seq.gt.resize(n);
    parallel_for(n, [&](std::size_t k) {
        const auto& entry = manifest.frames[k];
        auto& frame = seq.frames[k];
        frame.embedding = load_tensor(entry.embedding);
        frame.objectness = load_tensor(entry.objectness);
        frame.flow = load_tensor(entry.flow);
        if (entry.rgb) frame.rgb = load_rgb(*entry.rgb);
        if (entry.gt) seq.gt[k] = load_mask(*entry.gt);

        for (float& o : frame.objectness.data()) {
            if (o < -kObjectnessSlack || o > 1.0f + kObjectnessSlack) {
                fail(ErrorCode::InvalidValue, frame_tag(k) + ": objectness value " + std::to_string(o) +
                                                  " outside [0,1] in " + entry.objectness.string());
            }
            o = std::clamp(o, 0.0f, 1.0f);
        }
    });
    if (manifest.annotation0) seq.annotation0 = load_mask(*manifest.annotation0);
    validate_sequence(seq);
    return seq;
}

Sequence load_sequence(const fs::path& manifest_path) { return load_sequence(load_manifest(manifest_path)); }

}  // namespace seedvos

#include "seedvos/seed_tracking.hpp"

#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos {

void SeedTrack::append(std::size_t frame, std::size_t seed, std::span<const float> embedding) {
    frames.push_back(frame);
    seeds.push_back(seed);
    embeddings.emplace_back(embedding.begin(), embedding.end());
}

const char* to_string(RankingMode mode) {
    switch (mode) {
        case RankingMode::Combined: return "combined";
        case RankingMode::MotionOnly: return "motion";
        case RankingMode::ObjectnessOnly: return "objectness";
    }
    return "combined";
}

RankingMode parse_ranking_mode(const std::string& text) {
    if (text == "combined") return RankingMode::Combined;
    if (text == "motion") return RankingMode::MotionOnly;
    if (text == "objectness") return RankingMode::ObjectnessOnly;
    fail(ErrorCode::InvalidArgument, "unknown ranking mode '" + text + "' (expected combined, motion or objectness)");
}

std::size_t extend_track(const SeedTrack& track, const SeedSet& next) {
    if (next.empty()) fail(ErrorCode::EmptyInput, "cannot extend a track into a frame without seeds");
    std::size_t best = 0;
    double best_sum = -1.0;
    for (std::size_t s = 0; s < next.size(); ++s) {
        double sum = 0.0;
        for (const auto& member : track.embeddings) sum += similarity(next[s].embedding, member);
        if (sum > best_sum) {
            best_sum = sum;
            best = s;
        }
    }
    return best;
}

std::vector<SeedTrack> build_tracks(std::span<const SeedSet> per_frame) {
    if (per_frame.empty()) fail(ErrorCode::EmptyInput, "no frames to track");
    if (per_frame[0].empty()) fail(ErrorCode::EmptyInput, "first frame has no seeds");

    std::vector<SeedTrack> tracks(per_frame[0].size());
    parallel_for(tracks.size(), [&](std::size_t j) {
        auto& t = tracks[j];
        t.append(0, j, per_frame[0][j].embedding);
        for (std::size_t m = 1; m < per_frame.size(); ++m) {
            const std::size_t r = extend_track(t, per_frame[m]);
            t.append(m, r, per_frame[m][r].embedding);
        }
    });
    return tracks;
}

double score_track(std::span<const double> objectness, std::span<const double> motion, RankingMode mode) {
    if (objectness.size() != motion.size()) fail(ErrorCode::DimensionMismatch, "score lists differ in length");
    if (objectness.empty()) fail(ErrorCode::EmptyInput, "cannot score an empty track");
    double sum = 0.0;
    for (std::size_t i = 0; i < objectness.size(); ++i) {
        switch (mode) {
            case RankingMode::Combined: sum += objectness[i] * motion[i]; break;
            case RankingMode::MotionOnly: sum += motion[i]; break;
            case RankingMode::ObjectnessOnly: sum += objectness[i]; break;
        }
    }
    return sum / static_cast<double>(objectness.size());
}

std::size_t select_foreground_track(std::span<const double> scores) {
    if (scores.empty()) fail(ErrorCode::EmptyInput, "no tracks to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

}  // namespace seedvos

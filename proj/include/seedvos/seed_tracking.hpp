#pragma once

#include <span>
#include <string>
#include <vector>

#include "seedvos/embedding_ops.hpp"

namespace seedvos {

/// One seed per tracked frame, starting from a frame-0 seed. Member
/// embeddings are cached so extension does not need the frame data.
struct SeedTrack {
    std::vector<std::size_t> frames;  // positions in the per-frame seed list
    std::vector<std::size_t> seeds;   // seed index within that frame
    std::vector<std::vector<float>> embeddings;

    std::size_t length() const noexcept { return seeds.size(); }
    void append(std::size_t frame, std::size_t seed, std::span<const float> embedding);
};

enum class RankingMode { Combined, MotionOnly, ObjectnessOnly };

const char* to_string(RankingMode mode);
RankingMode parse_ranking_mode(const std::string& text);

/// Index of the next-frame seed with the largest summed similarity to all
/// current track members. Ties go to the lowest index.
std::size_t extend_track(const SeedTrack& track, const SeedSet& next);

/// One track per seed of the first set, each greedily extended through the
/// remaining sets. Tracks may converge on the same seed.
std::vector<SeedTrack> build_tracks(std::span<const SeedSet> per_frame);

/// Mean of O*M (combined), of M, or of O over the track members.
double score_track(std::span<const double> objectness, std::span<const double> motion, RankingMode mode);

/// Highest score, ties to the lowest track index.
std::size_t select_foreground_track(std::span<const double> scores);

}  // namespace seedvos

// Per-pixel pose state and absorption score on a sphere partition. This is the
// structure the pose sampler draws from: Untried pixels with a defined score
// are candidates, everything else has probability zero.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctraj/sphere_grid.hpp"

namespace ctraj {

enum class PoseState : std::uint8_t { Untried = 0, Unreachable, Failed, Acquired };

inline const char* to_string(PoseState s) {
    switch (s) {
        case PoseState::Untried: return "Untried";
        case PoseState::Unreachable: return "Unreachable";
        case PoseState::Failed: return "Failed";
        case PoseState::Acquired: return "Acquired";
    }
    return "?";
}

inline PoseState pose_state_from_string(const std::string& s) {
    if (s == "Untried") return PoseState::Untried;
    if (s == "Unreachable") return PoseState::Unreachable;
    if (s == "Failed") return PoseState::Failed;
    if (s == "Acquired") return PoseState::Acquired;
    throw std::invalid_argument("unknown pose state: " + s);
}

class SphereScoreMap {
  public:
    explicit SphereScoreMap(SpherePartition partition)
        : partition_(partition),
          state_(partition.n_pix(), PoseState::Untried),
          score_(partition.n_pix()) {}

    const SpherePartition& partition() const { return partition_; }
    std::uint32_t n_pix() const { return partition_.n_pix(); }

    PoseState state(PixelId id) const { return state_.at(id); }
    const std::optional<std::uint32_t>& score(PixelId id) const { return score_.at(id); }

    /// Unreachable/Failed never carry a score; setting either clears it.
    void set_state(PixelId id, PoseState s) {
        state_.at(id) = s;
        if (s == PoseState::Unreachable || s == PoseState::Failed) score_[id].reset();
    }

    void set_score(PixelId id, std::uint32_t value) {
        if (state_.at(id) == PoseState::Unreachable || state_[id] == PoseState::Failed)
            throw std::logic_error("unreachable/failed pixels cannot carry a score");
        score_[id] = value;
    }

    void set_acquired(PixelId id, std::uint32_t score) {
        state_.at(id) = PoseState::Acquired;
        score_[id] = score;
    }

    std::size_t count_state(PoseState s) const {
        std::size_t n = 0;
        for (auto st : state_)
            if (st == s) ++n;
        return n;
    }

    void write_csv(std::ostream& os) const {
        os << "pixel_id,theta_rad,phi_rad,state,score\n";
        for (std::uint32_t i = 0; i < n_pix(); ++i) {
            auto c = partition_.pixel_center(i);
            os << i << ',' << format_double(c.theta) << ',' << format_double(c.phi) << ','
               << to_string(state_[i]) << ',';
            if (score_[i]) os << *score_[i];
            os << '\n';
        }
    }

    void save_csv(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
        write_csv(os);
    }

    static SphereScoreMap read_csv(std::istream& is) {
        std::string line;
        if (!std::getline(is, line)) throw std::runtime_error("empty score map csv");
        std::vector<std::pair<PoseState, std::optional<std::uint32_t>>> rows;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string field;
            std::getline(ss, field, ',');  // pixel_id, implied by row order
            std::getline(ss, field, ',');  // theta
            std::getline(ss, field, ',');  // phi
            std::getline(ss, field, ',');
            PoseState st = pose_state_from_string(field);
            std::optional<std::uint32_t> sc;
            if (std::getline(ss, field, ',') && !field.empty())
                sc = static_cast<std::uint32_t>(std::stoul(field));
            rows.emplace_back(st, sc);
        }
        double n_side = std::sqrt(static_cast<double>(rows.size()) / 12.0);
        int n = static_cast<int>(std::lround(n_side));
        if (n < 1 || num_pixels(n) != rows.size())
            throw std::runtime_error("score map csv row count is not 12*n^2");
        SphereScoreMap map((SpherePartition(n)));
        for (std::uint32_t i = 0; i < rows.size(); ++i) {
            map.state_[i] = rows[i].first;
            map.score_[i] = rows[i].second;
        }
        return map;
    }

    static SphereScoreMap load_csv(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("cannot open: " + path);
        return read_csv(is);
    }

  private:
    SpherePartition partition_;
    std::vector<PoseState> state_;
    std::vector<std::optional<std::uint32_t>> score_;
};

/// Projects a coarse map onto a denser partition: every target pixel looks up
/// the source pixel containing its center. Scores travel with the region;
/// Acquired source pixels yield *Untried* children carrying the score (the
/// children are new candidate poses near a measured direction), while
/// Unreachable and Failed regions stay excluded on the dense grid.
inline SphereScoreMap transfer_scores(const SphereScoreMap& low,
                                      const SpherePartition& high_partition) {
    if (high_partition.n_side() < low.partition().n_side())
        throw std::invalid_argument("transfer_scores target must not be coarser than source");
    SphereScoreMap high(high_partition);
    for (std::uint32_t i = 0; i < high_partition.n_pix(); ++i) {
        auto c = high_partition.pixel_center(i);
        PixelId src = low.partition().ang_to_pixel(c.theta, c.phi);
        switch (low.state(src)) {
            case PoseState::Unreachable:
                high.set_state(i, PoseState::Unreachable);
                break;
            case PoseState::Failed:
                high.set_state(i, PoseState::Failed);
                break;
            case PoseState::Acquired:
            case PoseState::Untried:
                if (low.score(src)) high.set_score(i, *low.score(src));
                break;
        }
    }
    return high;
}

}  // namespace ctraj

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "msgfn/games/analysis.hpp"
#include "msgfn/games/controls.hpp"
#include "msgfn/games/level.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

struct ReplayEntry {
  Level level;
  std::map<std::string, int> properties;
  std::vector<double> u;  // measured, normalized
  ClusterKey key;
};

/// Playable levels of one size, grouped by cluster key. Entries and clusters
/// keep insertion order so sampling is reproducible.
class SizeBuffer {
 public:
  struct Cluster {
    ClusterKey key;
    std::vector<std::size_t> members;
  };

  /// False if an identical grid is already stored.
  bool insert(ReplayEntry entry) {
    std::string cells(entry.level.cells.begin(), entry.level.cells.end());
    if (!seen_.insert(std::move(cells)).second) return false;
    auto [it, fresh] = cluster_index_.try_emplace(entry.key, clusters_.size());
    if (fresh) clusters_.push_back({entry.key, {}});
    Cluster& c = clusters_[it->second];
    c.members.push_back(entries_.size());
    max_cluster_ = std::max(max_cluster_, c.members.size());
    entries_.push_back(std::move(entry));
    return true;
  }

  bool contains(const Level& level) const {
    return seen_.count(std::string(level.cells.begin(), level.cells.end())) != 0;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t cluster_count() const { return clusters_.size(); }
  std::size_t max_cluster_size() const { return max_cluster_; }
  std::size_t cluster_size(const ClusterKey& key) const {
    auto it = cluster_index_.find(key);
    return it == cluster_index_.end() ? 0 : clusters_[it->second].members.size();
  }
  const std::vector<ReplayEntry>& entries() const { return entries_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }

  /// Uniform cluster, then uniform member: P(entry) = 1 / (N |C|).
  const ReplayEntry& diversity_sample(Rng& rng) const {
    if (clusters_.empty()) throw std::out_of_range("diversity_sample: empty buffer");
    const Cluster& c = clusters_[uniform_index(rng, clusters_.size())];
    return entries_[c.members[uniform_index(rng, c.members.size())]];
  }

  const ReplayEntry& uniform_sample(Rng& rng) const {
    if (entries_.empty()) throw std::out_of_range("uniform_sample: empty buffer");
    return entries_[uniform_index(rng, entries_.size())];
  }

 private:
  std::vector<ReplayEntry> entries_;
  std::vector<Cluster> clusters_;
  std::map<ClusterKey, std::size_t> cluster_index_;
  std::unordered_set<std::string> seen_;
  std::size_t max_cluster_ = 0;
};

class ReplayBuffer {
 public:
  /// Stores a playable level with its measured controls.
  bool insert(const Level& level, const Analysis& analysis, const std::vector<ControlSpec>& specs,
              bool use_signature = false) {
    if (!analysis.playable) throw std::invalid_argument("insert_replay: level is not playable");
    ReplayEntry e{level, analysis.properties, measure_controls(level, analysis, specs),
                  cluster_key(level, analysis, use_signature)};
    return insert(std::move(e));
  }

  bool insert(ReplayEntry entry) {
    const Size s{entry.level.width, entry.level.height};
    return buffers_[s].insert(std::move(entry));
  }

  /// Null when nothing has been stored at this size.
  const SizeBuffer* find(Size s) const {
    auto it = buffers_.find(s);
    return it == buffers_.end() || it->second.empty() ? nullptr : &it->second;
  }

  std::size_t size(Size s) const {
    const SizeBuffer* b = find(s);
    return b ? b->size() : 0;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [s, b] : buffers_) n += b.size();
    return n;
  }

  /// Populated size minimizing |dw| + |dh|; ties go to the smaller area.
  std::optional<Size> closest_populated(Size s) const {
    std::optional<Size> best;
    int best_dist = 0;
    for (const auto& [size, b] : buffers_) {
      if (b.empty()) continue;
      const int d = std::abs(size.width - s.width) + std::abs(size.height - s.height);
      if (!best || d < best_dist || (d == best_dist && size.area() < best->area())) {
        best = size;
        best_dist = d;
      }
    }
    return best;
  }

  std::vector<Size> sizes() const {
    std::vector<Size> out;
    for (const auto& [s, b] : buffers_)
      if (!b.empty()) out.push_back(s);
    return out;
  }

 private:
  std::map<Size, SizeBuffer> buffers_;
};

}  // namespace msgfn

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hstl/data.hpp"

namespace hstl {

// One level of the body-part partition: ordered groups of 1-based part
// indices, each group a contiguous run.
struct PartitionLevel {
  int level_index = 0;
  std::vector<std::vector<int>> groups;

  int group_count() const { return static_cast<int>(groups.size()); }
};

// Nested grouping of k horizontal parts across L levels, whole body down to
// the finest division.
struct PartitionHierarchy {
  int k = 0;
  std::vector<PartitionLevel> levels;

  int level_count() const { return static_cast<int>(levels.size()); }
  const PartitionLevel& level(int l) const { return levels[l - 1]; }  // 1-based
};

// Fixed-length descriptor of one part's silhouette stream: mean and standard
// deviation of the per-frame foreground fraction plus the first
// `fourier_coeffs` DFT magnitudes of the fraction time series (scaled by 1/T).
struct PartSummary {
  int part_index = 0;
  std::vector<double> vector;
};

// Split frames into k uniform horizontal bands; part j covers rows
// [(j-1)*H/k, j*H/k). Throws ConfigError when H is not divisible by k.
std::vector<std::vector<Mask>> slice_parts(const SilhouetteSequence& seq, int k);

PartSummary summarize_part(const std::vector<Mask>& part_stream, int part_index,
                           int fourier_coeffs = 4);

// Contiguity-constrained agglomerative clustering (Ward-style linkage) over
// part-averaged summary vectors; the dendrogram cut at each target count
// gives one level. Ties in linkage cost prefer the merge whose left cluster
// starts at the smaller part index.
PartitionHierarchy build_hierarchy(
    const std::vector<std::vector<PartSummary>>& per_sequence_summaries,
    const std::vector<int>& target_group_counts);

// The shipping default: the 1-2-4* plan with k = 8.
PartitionHierarchy default_hierarchy();

// Reports every invariant breach with level and group indices; empty = valid.
// Never throws.
std::vector<std::string> validate_hierarchy(const PartitionHierarchy& h);

// Text format: first line k, then one line per level with groups written as
// part-index ranges, e.g. "1-5,6-8".
std::string hierarchy_to_text(const PartitionHierarchy& h);
PartitionHierarchy hierarchy_from_text(const std::string& text);

void save_hierarchy(const PartitionHierarchy& h, const std::filesystem::path& path);
PartitionHierarchy load_hierarchy(const std::filesystem::path& path);

}  // namespace hstl

#include "hstl/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hstl/errors.hpp"

namespace hstl {

std::vector<std::vector<Mask>> slice_parts(const SilhouetteSequence& seq, int k) {
  if (seq.frames.empty()) throw ShapeError("slice_parts: empty sequence");
  const int h = seq.frames.front().h;
  const int w = seq.frames.front().w;
  if (k < 1) throw ConfigError("slice_parts: k must be >= 1");
  if (h % k != 0)
    throw ConfigError("slice_parts: frame height " + std::to_string(h) +
                      " not divisible by k=" + std::to_string(k));
  const int band = h / k;
  std::vector<std::vector<Mask>> parts(k);
  for (auto& p : parts) p.reserve(seq.frames.size());
  for (const Mask& frame : seq.frames) {
    if (frame.h != h || frame.w != w)
      throw ShapeError("slice_parts: inconsistent frame sizes");
    for (int j = 0; j < k; ++j) {
      Mask m(band, w);
      for (int r = 0; r < band; ++r)
        for (int c = 0; c < w; ++c) m.at(r, c) = frame.at(j * band + r, c);
      parts[j].push_back(std::move(m));
    }
  }
  return parts;
}

PartSummary summarize_part(const std::vector<Mask>& part_stream, int part_index,
                           int fourier_coeffs) {
  if (part_stream.empty()) throw ShapeError("summarize_part: empty part stream");
  const int t_len = static_cast<int>(part_stream.size());
  std::vector<double> frac(t_len);
  for (int t = 0; t < t_len; ++t) {
    const Mask& m = part_stream[t];
    const double area = static_cast<double>(m.h) * m.w;
    frac[t] = area > 0 ? static_cast<double>(m.foreground_count()) / area : 0.0;
  }
  const double mean = std::accumulate(frac.begin(), frac.end(), 0.0) / t_len;
  double var = 0.0;
  for (double f : frac) var += (f - mean) * (f - mean);
  var /= t_len;  // population variance

  PartSummary s;
  s.part_index = part_index;
  s.vector.push_back(mean);
  s.vector.push_back(std::sqrt(var));
  const double two_pi = 6.283185307179586476925286766559;
  for (int q = 1; q <= fourier_coeffs; ++q) {
    double re = 0.0, im = 0.0;
    for (int t = 0; t < t_len; ++t) {
      const double ang = two_pi * q * t / t_len;
      re += frac[t] * std::cos(ang);
      im -= frac[t] * std::sin(ang);
    }
    s.vector.push_back(std::sqrt(re * re + im * im) / t_len);
  }
  return s;
}

namespace {

struct Cluster {
  int lo = 0, hi = 0;  // part-index interval, 1-based inclusive
  int count = 0;
  std::vector<double> mean;
};

double ward_cost(const Cluster& a, const Cluster& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    const double d = a.mean[i] - b.mean[i];
    d2 += d * d;
  }
  return static_cast<double>(a.count) * b.count / (a.count + b.count) * d2;
}

std::vector<std::vector<int>> intervals_to_groups(const std::vector<Cluster>& cs) {
  std::vector<std::vector<int>> groups;
  groups.reserve(cs.size());
  for (const Cluster& c : cs) {
    std::vector<int> g(c.hi - c.lo + 1);
    std::iota(g.begin(), g.end(), c.lo);
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace

PartitionHierarchy build_hierarchy(
    const std::vector<std::vector<PartSummary>>& per_sequence_summaries,
    const std::vector<int>& target_group_counts) {
  if (per_sequence_summaries.empty())
    throw ConfigError("build_hierarchy: need at least one sequence");
  const int k = static_cast<int>(per_sequence_summaries.front().size());
  if (k < 1) throw ConfigError("build_hierarchy: empty summary list");

  if (target_group_counts.empty() || target_group_counts.front() != 1 ||
      target_group_counts.back() != k)
    throw ConfigError("build_hierarchy: target counts must start at 1 and end at k");
  for (std::size_t i = 0; i < target_group_counts.size(); ++i) {
    if (target_group_counts[i] > k)
      throw ConfigError("build_hierarchy: target count " +
                        std::to_string(target_group_counts[i]) + " exceeds k=" +
                        std::to_string(k));
    if (i > 0 && target_group_counts[i] <= target_group_counts[i - 1])
      throw ConfigError("build_hierarchy: target counts must be strictly ascending");
  }

  const std::size_t dim = per_sequence_summaries.front().front().vector.size();
  std::vector<std::vector<double>> centroid(k, std::vector<double>(dim, 0.0));
  for (const auto& seq : per_sequence_summaries) {
    if (static_cast<int>(seq.size()) != k)
      throw ConfigError("build_hierarchy: inconsistent part counts across sequences");
    for (int j = 0; j < k; ++j) {
      if (seq[j].vector.size() != dim)
        throw ConfigError("build_hierarchy: inconsistent summary vector lengths");
      for (std::size_t d = 0; d < dim; ++d) centroid[j][d] += seq[j].vector[d];
    }
  }
  const double inv_n = 1.0 / per_sequence_summaries.size();
  for (auto& c : centroid)
    for (double& x : c) x *= inv_n;

  // Agglomerate adjacent clusters; record the partition at every size.
  std::vector<Cluster> active(k);
  for (int j = 0; j < k; ++j)
    active[j] = Cluster{j + 1, j + 1, 1, centroid[j]};

  std::vector<std::vector<std::vector<int>>> partition_at(k + 1);
  partition_at[k] = intervals_to_groups(active);
  while (active.size() > 1) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      const double cost = ward_cost(active[i], active[i + 1]);
      if (cost < best_cost) {  // ties keep the earlier (smaller lo) pair
        best_cost = cost;
        best = i;
      }
    }
    Cluster merged;
    const Cluster& a = active[best];
    const Cluster& b = active[best + 1];
    merged.lo = a.lo;
    merged.hi = b.hi;
    merged.count = a.count + b.count;
    merged.mean.resize(dim);
    for (std::size_t d = 0; d < dim; ++d)
      merged.mean[d] = (a.count * a.mean[d] + b.count * b.mean[d]) / merged.count;
    active[best] = std::move(merged);
    active.erase(active.begin() + best + 1);
    partition_at[active.size()] = intervals_to_groups(active);
  }

  PartitionHierarchy h;
  h.k = k;
  for (std::size_t l = 0; l < target_group_counts.size(); ++l) {
    PartitionLevel level;
    level.level_index = static_cast<int>(l) + 1;
    level.groups = partition_at[target_group_counts[l]];
    h.levels.push_back(std::move(level));
  }
  return h;
}

PartitionHierarchy default_hierarchy() {
  PartitionHierarchy h;
  h.k = 8;
  h.levels = {
      PartitionLevel{1, {{1, 2, 3, 4, 5, 6, 7, 8}}},
      PartitionLevel{2, {{1, 2, 3, 4, 5}, {6, 7, 8}}},
      PartitionLevel{3, {{1}, {2, 3, 4, 5}, {6, 7}, {8}}},
      PartitionLevel{4, {{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}}},
  };
  return h;
}

std::vector<std::string> validate_hierarchy(const PartitionHierarchy& h) {
  std::vector<std::string> out;
  auto bad = [&out](const std::string& msg) { out.push_back(msg); };

  if (h.k < 1) {
    bad("k must be >= 1");
    return out;
  }
  if (h.levels.empty()) {
    bad("hierarchy has no levels");
    return out;
  }

  for (std::size_t li = 0; li < h.levels.size(); ++li) {
    const PartitionLevel& lev = h.levels[li];
    const std::string tag = "level " + std::to_string(li + 1);
    if (lev.level_index != static_cast<int>(li) + 1)
      bad(tag + ": level_index is " + std::to_string(lev.level_index));
    std::vector<int> seen(h.k + 1, 0);
    int prev_hi = 0;
    for (std::size_t gi = 0; gi < lev.groups.size(); ++gi) {
      const auto& g = lev.groups[gi];
      const std::string gtag = tag + " group " + std::to_string(gi + 1);
      if (g.empty()) {
        bad(gtag + ": empty group");
        continue;
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 1 || g[i] > h.k) {
          bad(gtag + ": part index " + std::to_string(g[i]) + " out of range");
          continue;
        }
        seen[g[i]]++;
        if (i > 0 && g[i] != g[i - 1] + 1)
          bad(gtag + ": not a contiguous run");
      }
      if (g.front() <= prev_hi)
        bad(gtag + ": groups not in ascending spatial order or overlapping");
      prev_hi = g.back();
    }
    for (int j = 1; j <= h.k; ++j) {
      if (seen[j] == 0) bad(tag + ": part " + std::to_string(j) + " missing");
      if (seen[j] > 1) bad(tag + ": part " + std::to_string(j) + " duplicated");
    }
  }

  if (h.levels.front().groups.size() != 1)
    bad("level 1 must be the single whole-body group");

  for (std::size_t li = 1; li < h.levels.size(); ++li) {
    const auto& fine = h.levels[li];
    const auto& coarse = h.levels[li - 1];
    if (fine.groups.size() < coarse.groups.size())
      bad("level " + std::to_string(li + 1) + ": group count decreases");
    for (std::size_t gi = 0; gi < fine.groups.size(); ++gi) {
      const auto& g = fine.groups[gi];
      if (g.empty()) continue;
      bool nested = false;
      for (const auto& parent : coarse.groups) {
        if (std::includes(parent.begin(), parent.end(), g.begin(), g.end())) {
          nested = true;
          break;
        }
      }
      if (!nested)
        bad("level " + std::to_string(li + 1) + " group " + std::to_string(gi + 1) +
            ": not nested in any level-" + std::to_string(li) + " group");
    }
  }
  return out;
}

std::string hierarchy_to_text(const PartitionHierarchy& h) {
  std::ostringstream os;
  os << h.k << "\n";
  for (const PartitionLevel& lev : h.levels) {
    for (std::size_t gi = 0; gi < lev.groups.size(); ++gi) {
      const auto& g = lev.groups[gi];
      if (gi > 0) os << ",";
      if (g.size() == 1)
        os << g.front();
      else
        os << g.front() << "-" << g.back();
    }
    os << "\n";
  }
  return os.str();
}

PartitionHierarchy hierarchy_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  PartitionHierarchy h;
  if (!std::getline(is, line)) throw IoError("hierarchy file: missing k line");
  try {
    h.k = std::stoi(line);
  } catch (const std::exception&) {
    throw IoError("hierarchy file: bad k line '" + line + "'");
  }
  int level_index = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    PartitionLevel lev;
    lev.level_index = ++level_index;
    std::istringstream ls(line);
    std::string token;
    while (std::getline(ls, token, ',')) {
      int lo = 0, hi = 0;
      const auto dash = token.find('-');
      try {
        if (dash == std::string::npos) {
          lo = hi = std::stoi(token);
        } else {
          lo = std::stoi(token.substr(0, dash));
          hi = std::stoi(token.substr(dash + 1));
        }
      } catch (const std::exception&) {
        throw IoError("hierarchy file: bad group token '" + token + "'");
      }
      std::vector<int> g;
      for (int j = lo; j <= hi; ++j) g.push_back(j);
      lev.groups.push_back(std::move(g));
    }
    h.levels.push_back(std::move(lev));
  }
  return h;
}

void save_hierarchy(const PartitionHierarchy& h, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write hierarchy file " + path.string());
  f << hierarchy_to_text(h);
}

PartitionHierarchy load_hierarchy(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read hierarchy file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  PartitionHierarchy h = hierarchy_from_text(ss.str());
  const auto violations = validate_hierarchy(h);
  if (!violations.empty())
    throw ConfigError("hierarchy file " + path.string() +
                      " is invalid: " + violations.front());
  return h;
}

}  // namespace hstl

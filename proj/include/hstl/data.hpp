#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hstl/rng.hpp"
#include "hstl/tensor.hpp"

namespace hstl {

// Binary silhouette mask, values strictly {0, 1}.
struct Mask {
  int h = 0, w = 0;
  std::vector<std::uint8_t> v;

  Mask() = default;
  Mask(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0) {}

  std::uint8_t& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
  std::uint8_t at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto x : v) n += x;
    return n;
  }
};

// Labeled binary-mask clip with subject/condition/view metadata.
struct SilhouetteSequence {
  std::vector<Mask> frames;
  int subject_id = 0;
  std::string condition;  // NM / BG / CL
  int seq_index = 1;
  int view_deg = 0;
  std::string source;  // directory path or "seed:<n>"
};

// Procedural walker: articulated 2D capsule model (head, torso, two thighs,
// two calves, two feet) with sinusoidal joint angles. Lengths and widths are
// fractions of the frame height; the stride period is in frames.
struct SubjectGaitParams {
  double period = 18.0;       // frames per stride, integer-valued, [14, 24]
  double phase = 0.0;         // [0, 2pi)
  double body_height = 0.90;  // figure height fraction of H, [0.84, 0.95]
  double head_radius = 0.065; // [0.050, 0.078]
  double torso_halfwidth = 0.085;  // [0.062, 0.105]
  double torso_len = 0.33;    // [0.29, 0.37]
  double leg_len = 0.47;      // [0.42, 0.52], split evenly thigh/calf
  double limb_radius = 0.034; // [0.026, 0.042]
  double thigh_amp = 0.38;    // swing amplitude, radians, [0.24, 0.52]
  double calf_amp = 0.45;     // [0.28, 0.62]
  double calf_lag = 0.8;      // phase lag of calf flexion, [0.45, 1.25]
  double foot_len = 0.065;    // [0.048, 0.082]
  double stance = 0.030;      // hip half-separation, [0.015, 0.045]
  double sway_amp = 0.015;    // torso horizontal sway fraction of W, [0.0, 0.03]
  double bob_amp = 0.008;     // vertical bob fraction of H, [0.003, 0.013]
};

SubjectGaitParams generate_subject(std::uint64_t seed);

// Rasterize one walking sequence. The view angle (degrees) scales the
// apparent limb swing and body width and adds a small lean; conditions:
// "NM" as-is, "BG" attaches a bag blob, "CL" widens torso and thighs.
SilhouetteSequence render_sequence(const SubjectGaitParams& params, int view_deg,
                                   const std::string& condition, int frames,
                                   int height, int width,
                                   std::uint64_t noise_seed,
                                   double noise_rate = 0.002);

// --- PGM frame files ---------------------------------------------------

void write_pgm(const std::filesystem::path& path, const Mask& mask);

// Reads an 8-bit binary (P5) PGM. Throws IoError on malformed input.
struct GrayImage {
  int h = 0, w = 0, maxval = 255;
  std::vector<std::uint8_t> v;
};
GrayImage read_pgm(const std::filesystem::path& path);

// Binarize at threshold 0.5 of the image's max value (all-zero -> empty mask).
Mask binarize(const GrayImage& img);

// --- On-disk dataset ----------------------------------------------------
// Layout: root/<subject>/<condition-seq>/<view>/<frame>.pgm,
// e.g. root/003/NM-02/090/0007.pgm. Frames sorted lexicographically.

struct DatasetIndex {
  std::vector<SilhouetteSequence> sequences;
  int warning_count = 0;
};

DatasetIndex load_dataset(const std::filesystem::path& root);

// Horizontal center-of-mass centering followed by a fixed-size center
// crop/pad; stand-in for the alignment procedure used on real data.
Mask align_frame(const Mask& in, int out_h, int out_w);

// Writes a full synthetic corpus in the on-disk layout above.
struct GenSpec {
  int subjects = 10;
  std::vector<int> views = {0, 90, 180};
  std::vector<std::string> conditions = {"NM", "BG", "CL"};
  int seqs_per_condition = 2;
  int frames = 60;
  int height = 64;
  int width = 44;
  std::uint64_t seed = 1;
  double noise_rate = 0.002;
};
void generate_dataset(const GenSpec& spec, const std::filesystem::path& out_root);

// --- Clip sampling ------------------------------------------------------

// Contiguous window at a uniformly random start; shorter sequences wrap
// cyclically until the clip is full.
std::vector<Mask> sample_clip(const SilhouetteSequence& seq, int t_train, Rng& rng);

Tensor4 clip_to_tensor(const std::vector<Mask>& clip);

struct Batch {
  std::vector<Tensor4> clips;  // each (1, T, H, W)
  std::vector<int> labels;     // subject ids, size = clips.size()
};

// P distinct subjects, K clips each; sequences resampled with replacement
// when a subject has fewer than K.
Batch make_pk_batch(const DatasetIndex& index, int p_subjects, int k_clips,
                    int t_train, Rng& rng);

}  // namespace hstl

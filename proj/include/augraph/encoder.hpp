#pragma once

// Patch-based transformer encoder/decoder: masked-autoencoder pretraining and
// unmasked per-frame feature extraction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "augraph/nn.hpp"
#include "augraph/tensor.hpp"

namespace augraph {

struct EncoderConfig {
  int image_h = 64;
  int image_w = 64;
  int channels = 3;
  int patch_size = 16;
  int embed_dim = 64;
  int encoder_depth = 4;
  int decoder_depth = 2;
  int num_heads = 4;

  int grid_rows() const { return image_h / patch_size; }
  int grid_cols() const { return image_w / patch_size; }
  int tokens_per_frame() const { return grid_rows() * grid_cols(); }
  int patch_dim() const { return patch_size * patch_size * channels; }
  void validate() const;
};

// A clip of frames; valid_mask distinguishes real frames from blank padding.
struct FrameSequence {
  int64_t t = 0, c = 0, h = 0, w = 0;
  std::vector<double> pixels;       // t*c*h*w, row-major, values in [0,1]
  std::vector<uint8_t> valid_mask;  // length t, 1 = real frame
  std::string clip_id;

  double px(int64_t frame, int64_t ch, int64_t y, int64_t x) const {
    return pixels[static_cast<size_t>(((frame * c + ch) * h + y) * w + x)];
  }
  void validate() const;
};

struct PatchTokenSequence {
  std::vector<Tensor> frames;  // one [m x d] (or [(m-M) x d]) tensor per frame
  int grid_rows = 0, grid_cols = 0;
  std::vector<uint8_t> valid;  // carried over from the FrameSequence
};

struct MaskSpec {
  std::vector<std::vector<int64_t>> masked;  // per frame, sorted patch indices
  double mask_ratio = 0.0;

  int64_t masked_per_frame() const {
    return masked.empty() ? 0 : static_cast<int64_t>(masked[0].size());
  }
};

// Uniform random subset of round(mask_ratio*m) patch indices per frame,
// reproducible for a given seed.
MaskSpec sample_mask(int64_t m, double mask_ratio, uint64_t rng_seed,
                     int64_t num_frames);

// Sorted complement of the masked set.
std::vector<int64_t> visible_indices(const std::vector<int64_t>& masked,
                                     int64_t m);

// Patch projection + transformer encoder shared between pretraining and the
// detection pipeline (where the decoder is dropped).
struct EncoderCore {
  EncoderConfig cfg;
  Tensor patch_w, patch_b;
  std::vector<AttnBlockParams> blocks;
  Tensor ln_g, ln_b;
  std::vector<double> pos;  // fixed sin/cos table, m x d

  static EncoderCore create(const EncoderConfig& cfg, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);

  // Linear projection of non-overlapping patches + positional embeddings.
  PatchTokenSequence patchify(const FrameSequence& seq) const;
  // Full encoder; with a mask only the visible tokens are processed.
  PatchTokenSequence encode(const FrameSequence& seq,
                            const MaskSpec* mask = nullptr) const;
};

class MaeModel {
 public:
  MaeModel(const EncoderConfig& cfg, uint64_t seed);

  PatchTokenSequence patchify(const FrameSequence& seq) const {
    return enc_.patchify(seq);
  }
  PatchTokenSequence encode(const FrameSequence& seq,
                            const MaskSpec* mask = nullptr) const {
    return enc_.encode(seq, mask);
  }

  // Reconstructs pixels of the masked patches: one [M x patch_dim] tensor per
  // frame. visible_tokens must come from encode() with the same mask.
  std::vector<Tensor> decode_reconstruct(const PatchTokenSequence& visible_tokens,
                                         const MaskSpec& mask) const;

  // Ground-truth pixels of the masked patches (constant tensors).
  std::vector<Tensor> masked_patch_pixels(const FrameSequence& seq,
                                          const MaskSpec& mask) const;

  // Mean squared error over all masked pixels of the clip.
  Tensor pretrain_loss(const FrameSequence& seq, const MaskSpec& mask) const;

  const EncoderConfig& config() const { return enc_.cfg; }
  const EncoderCore& encoder() const { return enc_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  EncoderCore enc_;
  Tensor mask_token_;
  std::vector<AttnBlockParams> dec_blocks_;
  Tensor dec_ln_g_, dec_ln_b_;
  Tensor head_w_, head_b_;
  std::vector<double> dec_pos_;
  ParamStore params_;
};

// Row-major [m x patch_dim] pixel matrix of a frame's patches; patch vector
// layout is (channel, y, x) within the patch.
std::vector<double> frame_patch_matrix(const FrameSequence& seq, int64_t frame,
                                       const EncoderConfig& cfg);

}  // namespace augraph

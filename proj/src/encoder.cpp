#include "augraph/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace augraph {

void EncoderConfig::validate() const {
  AUG_CHECK_ARG(patch_size >= 1 && image_h >= patch_size && image_w >= patch_size,
                "encoder config: bad image/patch sizes");
  AUG_CHECK_ARG(image_h % patch_size == 0 && image_w % patch_size == 0,
                "encoder config: image ", image_h, "x", image_w,
                " not a multiple of patch ", patch_size);
  AUG_CHECK_ARG(channels >= 1, "encoder config: channels must be >= 1");
  AUG_CHECK_ARG(embed_dim >= 4 && embed_dim % 4 == 0,
                "encoder config: embed_dim must be a positive multiple of 4");
  AUG_CHECK_ARG(num_heads >= 1 && embed_dim % num_heads == 0,
                "encoder config: embed_dim ", embed_dim, " not divisible by ",
                num_heads, " heads");
  AUG_CHECK_ARG(encoder_depth >= 1 && decoder_depth >= 1,
                "encoder config: depths must be >= 1");
}

void FrameSequence::validate() const {
  AUG_CHECK(t >= 1, "frame sequence: need at least one frame");
  AUG_CHECK(pixels.size() == static_cast<size_t>(t * c * h * w),
            "frame sequence: pixel payload does not match ", t, "x", c, "x", h,
            "x", w);
  AUG_CHECK(valid_mask.size() == static_cast<size_t>(t),
            "frame sequence: valid_mask length ", valid_mask.size(),
            " != t = ", t);
  for (int64_t f = 0; f < t; ++f) {
    if (valid_mask[static_cast<size_t>(f)]) continue;
    const size_t base = static_cast<size_t>(f * c * h * w);
    for (size_t i = 0; i < static_cast<size_t>(c * h * w); ++i)
      AUG_CHECK(pixels[base + i] == 0.0, "frame sequence: padded frame ", f,
                " has non-zero pixels");
  }
}

MaskSpec sample_mask(int64_t m, double mask_ratio, uint64_t rng_seed,
                     int64_t num_frames) {
  AUG_CHECK_ARG(m >= 2, "sample_mask: need at least two patches");
  AUG_CHECK_ARG(num_frames >= 1, "sample_mask: need at least one frame");
  AUG_CHECK_ARG(mask_ratio > 0.0 && mask_ratio < 1.0,
                "sample_mask: mask_ratio must lie in (0,1)");
  const int64_t count = std::llround(mask_ratio * static_cast<double>(m));
  AUG_CHECK_ARG(count >= 1 && count < m, "sample_mask: ratio ", mask_ratio,
                " over ", m, " patches leaves ", count,
                " masked; need 1 <= M < m");

  std::mt19937_64 rng(rng_seed);
  MaskSpec spec;
  spec.mask_ratio = mask_ratio;
  spec.masked.resize(static_cast<size_t>(num_frames));
  std::vector<int64_t> perm(static_cast<size_t>(m));
  for (int64_t f = 0; f < num_frames; ++f) {
    std::iota(perm.begin(), perm.end(), 0);
    // Partial Fisher-Yates: the first `count` entries are the masked set.
    for (int64_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<int64_t> pick(i, m - 1);
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(pick(rng))]);
    }
    auto& dst = spec.masked[static_cast<size_t>(f)];
    dst.assign(perm.begin(), perm.begin() + count);
    std::sort(dst.begin(), dst.end());
  }
  return spec;
}

std::vector<int64_t> visible_indices(const std::vector<int64_t>& masked,
                                     int64_t m) {
  std::vector<uint8_t> is_masked(static_cast<size_t>(m), 0);
  for (int64_t i : masked) {
    AUG_CHECK(i >= 0 && i < m, "mask index ", i, " out of range");
    is_masked[static_cast<size_t>(i)] = 1;
  }
  std::vector<int64_t> visible;
  visible.reserve(static_cast<size_t>(m) - masked.size());
  for (int64_t i = 0; i < m; ++i)
    if (!is_masked[static_cast<size_t>(i)]) visible.push_back(i);
  return visible;
}

std::vector<double> frame_patch_matrix(const FrameSequence& seq, int64_t frame,
                                       const EncoderConfig& cfg) {
  const int p = cfg.patch_size;
  const int gr = cfg.grid_rows(), gc = cfg.grid_cols();
  const int64_t pd = cfg.patch_dim();
  std::vector<double> out(static_cast<size_t>(gr) * gc * pd);
  for (int r = 0; r < gr; ++r) {
    for (int cidx = 0; cidx < gc; ++cidx) {
      double* dst = out.data() + (static_cast<size_t>(r) * gc + cidx) * pd;
      for (int64_t ch = 0; ch < seq.c; ++ch)
        for (int y = 0; y < p; ++y)
          for (int x = 0; x < p; ++x)
            *dst++ = seq.px(frame, ch, r * p + y, cidx * p + x);
    }
  }
  return out;
}

EncoderCore EncoderCore::create(const EncoderConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  EncoderCore e;
  e.cfg = cfg;
  e.patch_w = xavier_uniform(cfg.patch_dim(), cfg.embed_dim, rng);
  e.patch_b = Tensor::zeros(1, cfg.embed_dim);
  e.blocks.reserve(static_cast<size_t>(cfg.encoder_depth));
  for (int i = 0; i < cfg.encoder_depth; ++i)
    e.blocks.push_back(AttnBlockParams::create(cfg.embed_dim, rng));
  e.ln_g = Tensor::full(1, cfg.embed_dim, 1.0);
  e.ln_b = Tensor::zeros(1, cfg.embed_dim);
  e.pos = sincos_pos_embed_2d(cfg.grid_rows(), cfg.grid_cols(), cfg.embed_dim);
  return e;
}

void EncoderCore::register_params(ParamStore& store, const std::string& prefix) {
  patch_w = store.add(prefix + ".patch.w", patch_w);
  patch_b = store.add(prefix + ".patch.b", patch_b);
  for (size_t i = 0; i < blocks.size(); ++i)
    blocks[i].register_params(store, prefix + ".block" + std::to_string(i));
  ln_g = store.add(prefix + ".ln.g", ln_g);
  ln_b = store.add(prefix + ".ln.b", ln_b);
}

PatchTokenSequence EncoderCore::patchify(const FrameSequence& seq) const {
  seq.validate();
  AUG_CHECK_ARG(seq.h == cfg.image_h && seq.w == cfg.image_w &&
                    seq.c == cfg.channels,
                "patchify: clip is ", seq.c, "x", seq.h, "x", seq.w,
                " but config expects ", cfg.channels, "x", cfg.image_h, "x",
                cfg.image_w);
  const int64_t m = cfg.tokens_per_frame();
  Tensor pos_t = Tensor::from_values(m, cfg.embed_dim, pos);
  PatchTokenSequence out;
  out.grid_rows = cfg.grid_rows();
  out.grid_cols = cfg.grid_cols();
  out.valid = seq.valid_mask;
  out.frames.reserve(static_cast<size_t>(seq.t));
  for (int64_t f = 0; f < seq.t; ++f) {
    Tensor patches = Tensor::from_values(m, cfg.patch_dim(),
                                         frame_patch_matrix(seq, f, cfg));
    Tensor tok = add_rowvec(matmul(patches, patch_w), patch_b);
    out.frames.push_back(add(tok, pos_t));
  }
  return out;
}

PatchTokenSequence EncoderCore::encode(const FrameSequence& seq,
                                       const MaskSpec* mask) const {
  PatchTokenSequence tokens = patchify(seq);
  const int64_t m = cfg.tokens_per_frame();
  if (mask != nullptr) {
    AUG_CHECK(mask->masked.size() == static_cast<size_t>(seq.t),
              "encode: mask covers ", mask->masked.size(), " frames, clip has ",
              seq.t);
    for (int64_t f = 0; f < seq.t; ++f) {
      const auto vis = visible_indices(mask->masked[static_cast<size_t>(f)], m);
      tokens.frames[static_cast<size_t>(f)] =
          gather_rows(tokens.frames[static_cast<size_t>(f)], vis);
    }
  }
  for (auto& frame : tokens.frames) {
    for (const auto& blk : blocks) frame = vit_block_forward(frame, blk, cfg.num_heads);
    frame = layer_norm_rows(frame, ln_g, ln_b);
  }
  return tokens;
}

MaeModel::MaeModel(const EncoderConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  enc_ = EncoderCore::create(cfg, rng);
  enc_.register_params(params_, "encoder");

  mask_token_ = normal_init(1, cfg.embed_dim, 0.02, rng);
  dec_blocks_.reserve(static_cast<size_t>(cfg.decoder_depth));
  for (int i = 0; i < cfg.decoder_depth; ++i)
    dec_blocks_.push_back(AttnBlockParams::create(cfg.embed_dim, rng));
  dec_ln_g_ = Tensor::full(1, cfg.embed_dim, 1.0);
  dec_ln_b_ = Tensor::zeros(1, cfg.embed_dim);
  head_w_ = xavier_uniform(cfg.embed_dim, cfg.patch_dim(), rng);
  head_b_ = Tensor::zeros(1, cfg.patch_dim());
  dec_pos_ = enc_.pos;

  mask_token_ = params_.add("decoder.mask_token", mask_token_);
  for (size_t i = 0; i < dec_blocks_.size(); ++i)
    dec_blocks_[i].register_params(params_, "decoder.block" + std::to_string(i));
  dec_ln_g_ = params_.add("decoder.ln.g", dec_ln_g_);
  dec_ln_b_ = params_.add("decoder.ln.b", dec_ln_b_);
  head_w_ = params_.add("decoder.head.w", head_w_);
  head_b_ = params_.add("decoder.head.b", head_b_);
}

std::vector<Tensor> MaeModel::decode_reconstruct(
    const PatchTokenSequence& visible_tokens, const MaskSpec& mask) const {
  const auto& cfg = enc_.cfg;
  const int64_t m = cfg.tokens_per_frame();
  AUG_CHECK(visible_tokens.frames.size() == mask.masked.size(),
            "decode: token frames ", visible_tokens.frames.size(),
            " vs mask frames ", mask.masked.size());
  Tensor pos_t = Tensor::from_values(m, cfg.embed_dim, dec_pos_);
  std::vector<Tensor> recon;
  recon.reserve(visible_tokens.frames.size());
  for (size_t f = 0; f < visible_tokens.frames.size(); ++f) {
    const auto& masked = mask.masked[f];
    const auto vis = visible_indices(masked, m);
    const Tensor& tokens = visible_tokens.frames[f];
    AUG_CHECK(tokens.rows() == static_cast<int64_t>(vis.size()),
              "decode: frame ", f, " has ", tokens.rows(),
              " visible tokens, mask implies ", vis.size());
    Tensor full = compose_tokens(tokens, vis, mask_token_, m);
    Tensor x = add(full, pos_t);
    for (const auto& blk : dec_blocks_)
      x = vit_block_forward(x, blk, cfg.num_heads);
    x = layer_norm_rows(x, dec_ln_g_, dec_ln_b_);
    Tensor pixels = add_rowvec(matmul(x, head_w_), head_b_);
    recon.push_back(gather_rows(pixels, masked));
  }
  return recon;
}

std::vector<Tensor> MaeModel::masked_patch_pixels(const FrameSequence& seq,
                                                  const MaskSpec& mask) const {
  const auto& cfg = enc_.cfg;
  const int64_t pd = cfg.patch_dim();
  std::vector<Tensor> out;
  out.reserve(static_cast<size_t>(seq.t));
  for (int64_t f = 0; f < seq.t; ++f) {
    const auto patches = frame_patch_matrix(seq, f, cfg);
    const auto& masked = mask.masked[static_cast<size_t>(f)];
    std::vector<double> v(masked.size() * static_cast<size_t>(pd));
    for (size_t i = 0; i < masked.size(); ++i)
      std::copy_n(patches.data() + masked[i] * pd, pd,
                  v.data() + static_cast<int64_t>(i) * pd);
    out.push_back(Tensor::from_values(static_cast<int64_t>(masked.size()), pd,
                                      std::move(v)));
  }
  return out;
}

Tensor MaeModel::pretrain_loss(const FrameSequence& seq,
                               const MaskSpec& mask) const {
  PatchTokenSequence visible = encode(seq, &mask);
  std::vector<Tensor> recon = decode_reconstruct(visible, mask);
  std::vector<Tensor> target = masked_patch_pixels(seq, mask);

  Tensor total;
  int64_t count = 0;
  for (size_t f = 0; f < recon.size(); ++f) {
    Tensor diff = sub(recon[f], target[f]);
    Tensor sq = sum_all(mul(diff, diff));
    total = total.defined() ? add(total, sq) : sq;
    count += recon[f].size();
  }
  AUG_CHECK(count > 0, "pretrain loss: empty masked set");
  return scale(total, 1.0 / static_cast<double>(count));
}

}  // namespace augraph

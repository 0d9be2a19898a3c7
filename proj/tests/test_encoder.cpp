#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "augraph/check.hpp"
#include "augraph/encoder.hpp"

using namespace augraph;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.image_h = 8;
  cfg.image_w = 8;
  cfg.channels = 3;
  cfg.patch_size = 4;
  cfg.embed_dim = 8;
  cfg.encoder_depth = 1;
  cfg.decoder_depth = 1;
  cfg.num_heads = 1;
  return cfg;
}

FrameSequence random_clip(const EncoderConfig& cfg, int64_t t, uint64_t seed) {
  FrameSequence seq;
  seq.t = t;
  seq.c = cfg.channels;
  seq.h = cfg.image_h;
  seq.w = cfg.image_w;
  seq.clip_id = "test";
  seq.pixels.resize(static_cast<size_t>(t * seq.c * seq.h * seq.w));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& p : seq.pixels) p = dist(rng);
  seq.valid_mask.assign(static_cast<size_t>(t), 1);
  return seq;
}

}  // namespace

TEST_CASE("mask sampling: count, range, order, determinism") {
  MaskSpec spec = sample_mask(16, 0.75, 42, 3);
  CHECK(spec.masked.size() == 3);
  CHECK(spec.masked_per_frame() == 12);  // round(0.75 * 16)
  for (const auto& frame : spec.masked) {
    CHECK(frame.size() == 12);
    std::set<int64_t> uniq(frame.begin(), frame.end());
    CHECK(uniq.size() == 12);
    CHECK(*uniq.begin() >= 0);
    CHECK(*uniq.rbegin() < 16);
    CHECK(std::is_sorted(frame.begin(), frame.end()));
  }
  MaskSpec again = sample_mask(16, 0.75, 42, 3);
  CHECK(spec.masked == again.masked);
  MaskSpec other = sample_mask(16, 0.75, 43, 3);
  CHECK(spec.masked != other.masked);
}

TEST_CASE("mask sampling: frames draw independently") {
  MaskSpec spec = sample_mask(16, 0.5, 7, 8);
  bool any_differ = false;
  for (size_t f = 1; f < spec.masked.size(); ++f)
    if (spec.masked[f] != spec.masked[0]) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("mask sampling rejects degenerate ratios") {
  CHECK_THROWS_AS((void)sample_mask(16, 0.01, 1, 1), ConfigError);  // M = 0
  CHECK_THROWS_AS((void)sample_mask(16, 0.99, 1, 1), ConfigError);  // M = m
  CHECK_THROWS_AS((void)sample_mask(1, 0.5, 1, 1), ConfigError);
}

TEST_CASE("visible indices complement the mask") {
  std::vector<int64_t> masked = {1, 3, 4};
  std::vector<int64_t> vis = visible_indices(masked, 6);
  CHECK(vis == std::vector<int64_t>({0, 2, 5}));
}

TEST_CASE("patch extraction uses (channel, y, x) layout") {
  EncoderConfig cfg;
  cfg.image_h = 4;
  cfg.image_w = 4;
  cfg.channels = 2;
  cfg.patch_size = 2;
  cfg.embed_dim = 4;
  FrameSequence seq;
  seq.t = 1;
  seq.c = 2;
  seq.h = 4;
  seq.w = 4;
  seq.valid_mask = {1};
  seq.pixels.resize(2 * 4 * 4);
  for (int64_t ch = 0; ch < 2; ++ch)
    for (int64_t y = 0; y < 4; ++y)
      for (int64_t x = 0; x < 4; ++x)
        seq.pixels[static_cast<size_t>((ch * 4 + y) * 4 + x)] =
            ch * 100.0 + y * 10.0 + x;

  std::vector<double> pm = frame_patch_matrix(seq, 0, cfg);
  REQUIRE(pm.size() == 4 * 8);  // 4 patches, 2*2*2 values each
  // patch index 3 is grid cell (1,1): pixels x,y in {2,3}
  const double* p3 = pm.data() + 3 * 8;
  CHECK(p3[0] == 22.0);  // ch0 y2 x2
  CHECK(p3[1] == 23.0);
  CHECK(p3[2] == 32.0);
  CHECK(p3[3] == 33.0);
  CHECK(p3[4] == 122.0);  // ch1 starts
  CHECK(p3[7] == 133.0);
}

TEST_CASE("patchify equals projection plus positional table") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(11);
  EncoderCore enc = EncoderCore::create(cfg, rng);
  FrameSequence seq = random_clip(cfg, 2, 3);
  PatchTokenSequence toks = enc.patchify(seq);
  REQUIRE(toks.frames.size() == 2);
  const int64_t m = cfg.tokens_per_frame();
  REQUIRE(toks.frames[0].rows() == m);
  REQUIRE(toks.frames[0].cols() == cfg.embed_dim);

  std::vector<double> pm = frame_patch_matrix(seq, 1, cfg);
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < cfg.embed_dim; ++j) {
      double want = enc.patch_b.at(0, j);
      for (int64_t k = 0; k < cfg.patch_dim(); ++k)
        want += pm[static_cast<size_t>(i * cfg.patch_dim() + k)] *
                enc.patch_w.at(k, j);
      want += enc.pos[static_cast<size_t>(i * cfg.embed_dim + j)];
      CHECK(toks.frames[1].at(i, j) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("masked encode keeps only visible tokens") {
  EncoderConfig cfg = tiny_config();
  std::mt19937_64 rng(21);
  EncoderCore enc = EncoderCore::create(cfg, rng);
  FrameSequence seq = random_clip(cfg, 1, 5);
  const int64_t m = cfg.tokens_per_frame();
  MaskSpec mask = sample_mask(m, 0.5, 9, 1);
  PatchTokenSequence full = enc.encode(seq);
  PatchTokenSequence vis = enc.encode(seq, &mask);
  CHECK(full.frames[0].rows() == m);
  CHECK(vis.frames[0].rows() == m - mask.masked_per_frame());
  // attention over the subset is not the subset of full attention
  const auto vis_idx = visible_indices(mask.masked[0], m);
  bool differs = false;
  for (size_t i = 0; i < vis_idx.size(); ++i)
    for (int64_t j = 0; j < cfg.embed_dim; ++j)
      if (std::abs(vis.frames[0].at(static_cast<int64_t>(i), j) -
                   full.frames[0].at(vis_idx[i], j)) > 1e-9)
        differs = true;
  CHECK(differs);
}

TEST_CASE("same seed builds identical models") {
  EncoderConfig cfg = tiny_config();
  MaeModel a(cfg, 99), b(cfg, 99), c(cfg, 100);
  REQUIRE(a.params().items().size() == b.params().items().size());
  bool all_equal = true, any_diff_c = false;
  for (size_t i = 0; i < a.params().items().size(); ++i) {
    if (a.params().items()[i].second.values() !=
        b.params().items()[i].second.values())
      all_equal = false;
    if (a.params().items()[i].second.values() !=
        c.params().items()[i].second.values())
      any_diff_c = true;
  }
  CHECK(all_equal);
  CHECK(any_diff_c);
}

TEST_CASE("reconstruction covers exactly the masked patches") {
  EncoderConfig cfg = tiny_config();
  MaeModel model(cfg, 1);
  FrameSequence seq = random_clip(cfg, 2, 17);
  const int64_t m = cfg.tokens_per_frame();
  MaskSpec mask = sample_mask(m, 0.5, 23, 2);
  PatchTokenSequence vis = model.encode(seq, &mask);
  std::vector<Tensor> recon = model.decode_reconstruct(vis, mask);
  REQUIRE(recon.size() == 2);
  CHECK(recon[0].rows() == mask.masked_per_frame());
  CHECK(recon[0].cols() == cfg.patch_dim());
  Tensor loss = model.pretrain_loss(seq, mask);
  CHECK(loss.scalar() >= 0.0);
}

TEST_CASE("identical frames with identical masks reconstruct identically") {
  EncoderConfig cfg = tiny_config();
  MaeModel model(cfg, 2);
  FrameSequence one = random_clip(cfg, 1, 31);
  FrameSequence two = one;
  two.t = 2;
  two.valid_mask = {1, 1};
  two.pixels.resize(one.pixels.size() * 2);
  std::copy(one.pixels.begin(), one.pixels.end(), two.pixels.begin());
  std::copy(one.pixels.begin(), one.pixels.end(),
            two.pixels.begin() + static_cast<int64_t>(one.pixels.size()));

  const int64_t m = cfg.tokens_per_frame();
  MaskSpec m1 = sample_mask(m, 0.5, 77, 1);
  MaskSpec m2 = m1;
  m2.masked.push_back(m1.masked[0]);

  const double single = model.pretrain_loss(one, m1).scalar();
  const double both = model.pretrain_loss(two, m2).scalar();
  CHECK(both == doctest::Approx(single).epsilon(1e-12));
}

TEST_CASE("targets ignore pixels of unmasked patches") {
  EncoderConfig cfg = tiny_config();
  MaeModel model(cfg, 3);
  FrameSequence seq = random_clip(cfg, 1, 41);
  const int64_t m = cfg.tokens_per_frame();
  MaskSpec mask = sample_mask(m, 0.5, 51, 1);

  FrameSequence perturbed = seq;
  const auto vis_idx = visible_indices(mask.masked[0], m);
  // overwrite every pixel of every visible patch
  const int p = cfg.patch_size;
  for (int64_t vi : vis_idx) {
    const int64_t r = vi / cfg.grid_cols(), c = vi % cfg.grid_cols();
    for (int64_t ch = 0; ch < cfg.channels; ++ch)
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x)
          perturbed.pixels[static_cast<size_t>(
              ((0 * cfg.channels + ch) * cfg.image_h + r * p + y) * cfg.image_w +
              c * p + x)] = 0.123;
  }

  std::vector<Tensor> t1 = model.masked_patch_pixels(seq, mask);
  std::vector<Tensor> t2 = model.masked_patch_pixels(perturbed, mask);
  CHECK(t1[0].values() == t2[0].values());
}

TEST_CASE("pretrain loss gradients match finite differences on a few tensors") {
  EncoderConfig cfg = tiny_config();
  MaeModel model(cfg, 4);
  FrameSequence seq = random_clip(cfg, 1, 61);
  const int64_t m = cfg.tokens_per_frame();
  MaskSpec mask = sample_mask(m, 0.5, 71, 1);

  auto loss_fn = [&] { return model.pretrain_loss(seq, mask); };
  model.params().zero_grad();
  Tensor loss = loss_fn();
  loss.backward();

  const double h = 1e-5;
  for (const char* name : {"decoder.mask_token", "decoder.head.b",
                           "encoder.patch.b", "encoder.ln.g"}) {
    Tensor* t = model.params().find(name);
    REQUIRE(t != nullptr);
    for (int64_t i = 0; i < t->size(); ++i) {
      const double orig = t->mutable_values()[static_cast<size_t>(i)];
      t->mutable_values()[static_cast<size_t>(i)] = orig + h;
      const double fp = loss_fn().scalar();
      t->mutable_values()[static_cast<size_t>(i)] = orig - h;
      const double fm = loss_fn().scalar();
      t->mutable_values()[static_cast<size_t>(i)] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = t->grad()[static_cast<size_t>(i)];
      const double diff = std::abs(num - ana);
      CAPTURE(name);
      CAPTURE(i);
      CHECK((diff <= 1e-8 ||
             diff / std::max(std::abs(num), std::abs(ana)) < 1e-4));
    }
  }
}

TEST_CASE("config validation rejects bad shapes") {
  EncoderConfig cfg = tiny_config();
  cfg.patch_size = 3;  // 8 % 3 != 0
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.embed_dim = 6;  // not a multiple of 4
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.num_heads = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("padded frames must be blank") {
  EncoderConfig cfg = tiny_config();
  FrameSequence seq = random_clip(cfg, 2, 5);
  seq.valid_mask = {1, 0};  // frame 1 claims padding but has random pixels
  CHECK_THROWS_AS(seq.validate(), RuntimeFault);
}

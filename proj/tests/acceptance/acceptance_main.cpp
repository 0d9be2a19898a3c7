// Acceptance checks for the full pipeline. Each numbered check prints one
// [PASS]/[FAIL] line; the process exits nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "augraph/au_graph.hpp"
#include "augraph/check.hpp"
#include "augraph/checkpoint.hpp"
#include "augraph/config.hpp"
#include "augraph/data.hpp"
#include "augraph/model.hpp"
#include "augraph/objectives.hpp"
#include "augraph/optim.hpp"
#include "augraph/trainer.hpp"

using namespace augraph;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& tag) {
    root = fs::temp_directory_path() / ("augraph_accept_" + tag);
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string sub(const std::string& name) const {
    fs::create_directories(root / name);
    return (root / name).string();
  }
};

int g_subchecks_failed = 0;

bool expect(bool ok, const std::string& what) {
  if (!ok) {
    std::cout << "       failed: " << what << "\n";
    ++g_subchecks_failed;
  }
  return ok;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor random_const(int64_t r, int64_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(static_cast<size_t>(r * c));
  for (double& x : v) x = dist(rng);
  return Tensor::from_values(r, c, v);
}

// Central finite differences over every parameter in the store.
// Returns the number of parameters whose relative error reaches 1e-3.
int check_all_gradients(ParamStore& store, const std::function<Tensor()>& f) {
  store.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, t] : store.items()) analytic.push_back(t.grad());

  int bad = 0;
  const double h = 1e-5;
  size_t pi = 0;
  for (const auto& [name, t] : store.items()) {
    Tensor param = t;
    for (int64_t i = 0; i < param.size(); ++i) {
      double& slot = param.mutable_values()[static_cast<size_t>(i)];
      const double orig = slot;
      slot = orig + h;
      const double fp = f().scalar();
      slot = orig - h;
      const double fm = f().scalar();
      slot = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = analytic[pi].empty()
                             ? 0.0
                             : analytic[pi][static_cast<size_t>(i)];
      const double diff = std::abs(num - ana);
      const double scale = std::max(std::abs(num), std::abs(ana));
      if (diff > 1e-8 && diff / scale >= 1e-3) {
        if (bad == 0)
          std::cout << "       first mismatch at " << name << "[" << i
                    << "]: analytic " << ana << " vs numeric " << num << "\n";
        ++bad;
      }
    }
    ++pi;
  }
  return bad;
}

AUPredictions random_predictions(int64_t t, int64_t n, std::mt19937_64& rng) {
  AUPredictions p;
  p.num_frames = t;
  p.num_aus = n;
  p.au_names = au_names_for(static_cast<int>(n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int64_t f = 0; f < t; ++f) {
    p.frame_valid.push_back(unit(rng) < 0.85 ? 1 : 0);
    for (int64_t i = 0; i < n; ++i) {
      p.scores.push_back(unit(rng));
      const double u = unit(rng);
      p.labels.push_back(u < 0.15 ? -1 : (u < 0.6 ? 0 : 1));
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// 1. end-to-end gradients
// ---------------------------------------------------------------------------
bool criterion_gradients() {
  const auto t0 = Clock::now();

  // (a) one-block masked autoencoder with the reconstruction loss
  {
    EncoderConfig cfg;
    cfg.image_h = 16;
    cfg.image_w = 16;
    cfg.patch_size = 8;
    cfg.embed_dim = 8;
    cfg.encoder_depth = 1;
    cfg.decoder_depth = 1;
    cfg.num_heads = 2;
    MaeModel model(cfg, 11);
    FrameSequence seq;
    seq.t = 1;
    seq.c = 3;
    seq.h = 16;
    seq.w = 16;
    seq.valid_mask = {1};
    seq.clip_id = "grad";
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    seq.pixels.resize(3 * 16 * 16);
    for (double& p : seq.pixels) p = unit(rng);
    MaskSpec mask = sample_mask(cfg.tokens_per_frame(), 0.5, 17, 1);
    const int bad = check_all_gradients(
        model.params(), [&] { return model.pretrain_loss(seq, mask); });
    expect(bad == 0, "autoencoder gradient mismatches: " + std::to_string(bad));
  }

  // (b) AU branches -> one graph block -> similarity scores -> detection loss
  {
    const int64_t n = 4, t = 4, d = 8, m = 3;
    std::mt19937_64 rng(19);
    PatchTokenSequence toks;
    for (int64_t f = 0; f < t; ++f) toks.frames.push_back(random_const(m, d, rng));
    toks.valid.assign(static_cast<size_t>(t), 1);

    STGLConfig scfg;
    scfg.num_blocks = 1;
    scfg.k = 2;
    AfgParams afg = AfgParams::create(n, d, rng);
    StglParams stgl = StglParams::create(scfg, d, kClipLength, rng);
    SCHeadParams sc = SCHeadParams::create(n, d, rng);
    ParamStore store;
    afg.register_params(store, "afg");
    stgl.register_params(store, "stgl", scfg);
    sc.register_params(store, "sc");

    std::vector<int> labels;
    std::vector<uint8_t> valid = {1, 1, 1, 0};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int64_t i = 0; i < t * n; ++i)
      labels.push_back(unit(rng) < 0.5 ? 0 : 1);

    const int bad = check_all_gradients(store, [&] {
      AUNodeFeatures nodes = afg_forward(toks, afg);
      AUNodeFeatures refined = stgl_forward(nodes, scfg, stgl);
      Tensor scores = sc_predict(refined, sc);
      return asymmetric_au_loss(scores, labels, valid);
    });
    expect(bad == 0, "detection gradient mismatches: " + std::to_string(bad));
  }

  const double dt = seconds_since(t0);
  expect(dt < 120.0, "gradient suite took " + std::to_string(dt) + "s");
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 2. KNN adjacency against a brute-force oracle
// ---------------------------------------------------------------------------
bool criterion_knn_oracle() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int64_t> pick_n(2, 12);
  std::uniform_int_distribution<int64_t> pick_t(1, 4);
  std::uniform_int_distribution<int64_t> pick_d(1, 8);
  std::uniform_int_distribution<int> pick_q(-2, 2);  // quantized: exact ties
  int mismatched = 0, degree_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t n = pick_n(rng), t = pick_t(rng), d = pick_d(rng);
    std::uniform_int_distribution<int> pick_k(
        1, static_cast<int>(std::min<int64_t>(4, n - 1)));
    const int k = pick_k(rng);
    const bool cosine = (trial % 2) == 1;
    AUNodeFeatures nodes;
    nodes.au_names = au_names_for(static_cast<int>(n));
    for (int64_t i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<size_t>(t * d));
      for (double& x : v) x = 0.5 * pick_q(rng);
      nodes.per_au.push_back(Tensor::from_values(t, d, v));
    }
    AUGraphTopology topo = build_knn_graph(nodes, k, cosine);

    // oracle: straight sort per (frame, node)
    for (int64_t f = 0; f < t; ++f) {
      for (int64_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, int64_t>> cand;
        for (int64_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double dot = 0, ni = 0, nj = 0;
          for (int64_t c = 0; c < d; ++c) {
            const double a = nodes.per_au[static_cast<size_t>(i)].at(f, c);
            const double b = nodes.per_au[static_cast<size_t>(j)].at(f, c);
            dot += a * b;
            ni += a * a;
            nj += b * b;
          }
          cand.emplace_back(
              cosine ? dot / (std::sqrt(ni) * std::sqrt(nj) + 1e-12) : dot, j);
        }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
          if (a.first != b.first) return a.first > b.first;
          return a.second < b.second;
        });
        std::vector<uint8_t> want(static_cast<size_t>(n), 0);
        for (int r = 0; r < k; ++r)
          want[static_cast<size_t>(cand[static_cast<size_t>(r)].second)] = 1;
        for (int64_t j = 0; j < n; ++j)
          if (topo.edge(f, i, j) != (want[static_cast<size_t>(j)] != 0))
            ++mismatched;
        if (topo.out_degree(f, i) != k || topo.edge(f, i, i)) ++degree_bad;
      }
    }
  }
  expect(mismatched == 0,
         "adjacency disagreements: " + std::to_string(mismatched));
  expect(degree_bad == 0, "degree/diagonal violations");
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 3. F1 against brute-force confusion arithmetic
// ---------------------------------------------------------------------------
bool criterion_f1_oracle() {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<int64_t> pick_t(1, 40);
  std::uniform_int_distribution<int64_t> pick_n(1, 12);
  double worst = 0.0;
  bool streaming_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    AUPredictions p = random_predictions(pick_t(rng), pick_n(rng), rng);
    MetricReport rep = f1_scores(p, 0.5);
    double sum = 0;
    for (int64_t i = 0; i < p.num_aus; ++i) {
      int64_t tp = 0, fp = 0, fn = 0;
      for (int64_t f = 0; f < p.num_frames; ++f) {
        if (!p.frame_valid[static_cast<size_t>(f)]) continue;
        const int y = p.label_at(f, i);
        if (y < 0) continue;
        const int yh = p.score_at(f, i) >= 0.5 ? 1 : 0;
        tp += (yh == 1 && y == 1);
        fp += (yh == 1 && y == 0);
        fn += (yh == 0 && y == 1);
      }
      const double prec = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
      const double f1 =
          prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      const AuMetric& m = rep.per_au[static_cast<size_t>(i)];
      worst = std::max({worst, std::abs(m.precision - prec),
                        std::abs(m.recall - rec), std::abs(m.f1 - f1)});
      sum += f1;
    }
    worst = std::max(
        worst, std::abs(rep.average_f1 - sum / double(p.num_aus)));

    // streaming over 3 arbitrary splits equals the batch result exactly
    ConfusionCounts cc;
    cc.reset(static_cast<size_t>(p.num_aus));
    int64_t cut1 = p.num_frames / 3, cut2 = 2 * p.num_frames / 3;
    for (const auto& [lo, hi] :
         std::vector<std::pair<int64_t, int64_t>>{
             {0, cut1}, {cut1, cut2}, {cut2, p.num_frames}}) {
      if (lo == hi) continue;
      AUPredictions part;
      part.num_frames = hi - lo;
      part.num_aus = p.num_aus;
      part.au_names = p.au_names;
      part.scores.assign(
          p.scores.begin() + lo * p.num_aus, p.scores.begin() + hi * p.num_aus);
      part.labels.assign(
          p.labels.begin() + lo * p.num_aus, p.labels.begin() + hi * p.num_aus);
      part.frame_valid.assign(p.frame_valid.begin() + lo,
                              p.frame_valid.begin() + hi);
      cc.accumulate(part, 0.5);
    }
    MetricReport srep = cc.report(p.au_names);
    if (srep.average_f1 != rep.average_f1 ||
        srep.frames_scored != rep.frames_scored)
      streaming_ok = false;
    for (size_t i = 0; i < rep.per_au.size(); ++i)
      if (srep.per_au[i].f1 != rep.per_au[i].f1) streaming_ok = false;
  }
  expect(worst <= 1e-12, "worst oracle deviation " + std::to_string(worst));
  expect(streaming_ok, "streaming != batch");
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 4. structural invariants
// ---------------------------------------------------------------------------
bool criterion_invariants() {
  std::mt19937_64 rng(4040);

  // graph degree/diagonal across stacked blocks (dynamic rebuilds included)
  {
    const int64_t n = 6, t = 3, d = 8;
    AUNodeFeatures nodes;
    nodes.au_names = au_names_for(n);
    for (int64_t i = 0; i < n; ++i) nodes.per_au.push_back(random_const(t, d, rng));
    STGLConfig cfg;
    cfg.num_blocks = 3;
    cfg.k = 3;
    StglParams params = StglParams::create(cfg, d, kClipLength, rng);
    std::vector<AUGraphTopology> log;
    (void)stgl_forward(nodes, cfg, params, &log);
    expect(log.size() == 3, "expected one topology per block");
    bool ok = true;
    for (const auto& topo : log)
      for (int64_t f = 0; f < topo.num_frames; ++f)
        for (int64_t i = 0; i < topo.n; ++i)
          if (topo.out_degree(f, i) != cfg.k || topo.edge(f, i, i)) ok = false;
    expect(ok, "out-degree != k or nonzero diagonal");
  }

  // temporal permutation equivariance with positions off
  {
    const int64_t n = 3, t = 6, d = 8;
    AUNodeFeatures a;
    a.au_names = au_names_for(n);
    for (int64_t i = 0; i < n; ++i) a.per_au.push_back(random_const(t, d, rng));
    TemporalParams p = TemporalParams::create(d, rng);
    STGLConfig cfg;
    std::vector<int64_t> perm = {4, 2, 0, 5, 1, 3};
    AUNodeFeatures shuffled;
    shuffled.au_names = a.au_names;
    for (int64_t i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<size_t>(t * d));
      for (int64_t f = 0; f < t; ++f)
        for (int64_t c = 0; c < d; ++c)
          v[static_cast<size_t>(f * d + c)] =
              a.per_au[static_cast<size_t>(i)].at(perm[static_cast<size_t>(f)], c);
      shuffled.per_au.push_back(Tensor::from_values(t, d, v));
    }
    AUNodeFeatures oa = temporal_attention_update(a, p, cfg);
    AUNodeFeatures os = temporal_attention_update(shuffled, p, cfg);
    double worst = 0;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t f = 0; f < t; ++f)
        for (int64_t c = 0; c < d; ++c)
          worst = std::max(
              worst, std::abs(os.per_au[static_cast<size_t>(i)].at(f, c) -
                              oa.per_au[static_cast<size_t>(i)].at(
                                  perm[static_cast<size_t>(f)], c)));
    expect(worst <= 1e-6,
           "permutation equivariance off by " + std::to_string(worst));
  }

  // spatial locality: per-frame updates never reach other frames (bitwise)
  {
    const int64_t n = 5, t = 4, d = 6;
    AUNodeFeatures a;
    a.au_names = au_names_for(n);
    for (int64_t i = 0; i < n; ++i) a.per_au.push_back(random_const(t, d, rng));
    AUNodeFeatures b;
    b.au_names = a.au_names;
    for (int64_t i = 0; i < n; ++i) {
      std::vector<double> v = a.per_au[static_cast<size_t>(i)].values();
      for (int64_t c = 0; c < d; ++c) v[static_cast<size_t>(3 * d + c)] += 2.0;
      b.per_au.push_back(Tensor::from_values(t, d, v));
    }
    GcnParams g = GcnParams::create(d, rng);
    AUNodeFeatures oa = gcn_update(a, build_knn_graph(a, 2, false), g);
    AUNodeFeatures ob = gcn_update(b, build_knn_graph(b, 2, false), g);
    bool ok = true;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t f = 0; f < 3; ++f)
        for (int64_t c = 0; c < d; ++c)
          if (oa.per_au[static_cast<size_t>(i)].at(f, c) !=
              ob.per_au[static_cast<size_t>(i)].at(f, c))
            ok = false;
    expect(ok, "frame perturbation leaked into other frames");
  }

  // temporal factorization: per-AU sequences never mix (bitwise)
  {
    const int64_t n = 4, t = 5, d = 8;
    AUNodeFeatures a;
    a.au_names = au_names_for(n);
    for (int64_t i = 0; i < n; ++i) a.per_au.push_back(random_const(t, d, rng));
    AUNodeFeatures b;
    b.au_names = a.au_names;
    b.per_au = a.per_au;
    b.per_au[1] = random_const(t, d, rng);
    TemporalParams p = TemporalParams::create(d, rng);
    STGLConfig cfg;
    AUNodeFeatures oa = temporal_attention_update(a, p, cfg);
    AUNodeFeatures ob = temporal_attention_update(b, p, cfg);
    bool ok = oa.per_au[0].values() == ob.per_au[0].values() &&
              oa.per_au[2].values() == ob.per_au[2].values() &&
              oa.per_au[3].values() == ob.per_au[3].values();
    expect(ok, "AU perturbation leaked into other AUs");
  }

  // similarity scores live in [0,1]
  {
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
      const int64_t n = 1 + static_cast<int64_t>(rng() % 8);
      const int64_t t = 1 + static_cast<int64_t>(rng() % 6);
      const int64_t d = 2 + static_cast<int64_t>(rng() % 8);
      AUNodeFeatures nodes;
      nodes.au_names = au_names_for(static_cast<int>(n));
      for (int64_t i = 0; i < n; ++i)
        nodes.per_au.push_back(random_const(t, d, rng));
      SCHeadParams head = SCHeadParams::create(n, d, rng);
      Tensor s = sc_predict(nodes, head);
      for (double v : s.values())
        if (!(v >= 0.0 && v <= 1.0)) ok = false;
    }
    expect(ok, "similarity score outside [0,1]");
  }

  // both losses are nonnegative
  {
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      AUPredictions p = random_predictions(6, 4, rng);
      if (asymmetric_au_loss_value(p) < 0.0) ok = false;
      Tensor r = random_const(4, 6, rng);
      Tensor g = random_const(4, 6, rng);
      if (masked_mse_loss(r, g).scalar() < 0.0) ok = false;
    }
    expect(ok, "negative loss value");
  }

  // gradient directions: positives pulled up, negatives pushed down;
  // reconstruction gradient points from target to output
  {
    std::vector<int> labels = {1, 0};
    std::vector<uint8_t> valid = {1};
    Tensor s = Tensor::from_values(1, 2, {0.4, 0.6}, true);
    asymmetric_au_loss(s, labels, valid).backward();
    expect(s.grad()[0] < 0.0 && s.grad()[1] > 0.0,
           "detection loss gradient signs");

    Tensor recon = Tensor::from_values(1, 2, {0.8, 0.1}, true);
    Tensor target = Tensor::from_values(1, 2, {0.5, 0.5});
    masked_mse_loss(recon, target).backward();
    expect(recon.grad()[0] > 0.0 && recon.grad()[1] < 0.0,
           "reconstruction loss gradient signs");
  }

  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 5. padded frames are inert
// ---------------------------------------------------------------------------
bool criterion_padding() {
  std::mt19937_64 rng(5150);
  bool ok = true;
  for (int pads = 1; pads <= 15; ++pads) {
    AUPredictions base = random_predictions(16 - pads, 6, rng);
    for (auto& v : base.frame_valid) v = 1;  // all real
    AUPredictions padded = base;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int e = 0; e < pads; ++e) {
      padded.num_frames += 1;
      padded.frame_valid.push_back(0);
      for (int64_t i = 0; i < 6; ++i) {
        padded.scores.push_back(unit(rng));   // junk scores on the padding
        padded.labels.push_back(e % 2);       // adversarial sentinel labels
      }
    }
    if (asymmetric_au_loss_value(padded) != asymmetric_au_loss_value(base))
      ok = false;
    MetricReport ra = f1_scores(base, 0.5);
    MetricReport rb = f1_scores(padded, 0.5);
    if (ra.average_f1 != rb.average_f1 || ra.frames_scored != rb.frames_scored)
      ok = false;
    for (size_t i = 0; i < ra.per_au.size(); ++i)
      if (ra.per_au[i].f1 != rb.per_au[i].f1) ok = false;

    // and through the differentiable path
    Tensor sb = Tensor::from_values(base.num_frames, 6, base.scores);
    Tensor sp = Tensor::from_values(padded.num_frames, 6, padded.scores);
    if (asymmetric_au_loss(sb, base.labels, base.frame_valid).scalar() !=
        asymmetric_au_loss(sp, padded.labels, padded.frame_valid).scalar())
      ok = false;
  }
  expect(ok, "padding moved a loss or metric");
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 6. full-model overfit on the synthetic set
// ---------------------------------------------------------------------------
bool criterion_overfit() {
  const auto t0 = Clock::now();
  Scratch scratch("overfit");
  SyntheticConfig synth;  // 4 videos x 16 frames x 12 AUs at 64x64
  synth.seed = 123;
  const std::string data_dir = scratch.sub("data");
  generate_synthetic(data_dir, synth);

  RunConfig cfg = RunConfig::desk_preset();
  cfg.dataset_root = data_dir;
  TrainOutcome out = cmd_train(cfg, scratch.sub("run"));
  const double dt = seconds_since(t0);
  std::cout << "       best average F1 " << out.best_average_f1 << " at step "
            << out.best_step << " (" << static_cast<int>(dt) << "s)\n";
  expect(out.best_average_f1 >= 0.95,
         "training F1 " + std::to_string(out.best_average_f1) + " < 0.95");
  expect(dt < 600.0, "overfit run took " + std::to_string(dt) + "s");
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 7. pretraining reduces masked reconstruction error
// ---------------------------------------------------------------------------
bool criterion_pretrain() {
  Scratch scratch("pretrain");
  SyntheticConfig synth;  // 4 x 16 = 64 frames
  synth.seed = 321;
  const std::string data_dir = scratch.sub("data");
  generate_synthetic(data_dir, synth);

  RunConfig cfg = RunConfig::desk_pretrain_preset();
  cfg.dataset_root = data_dir;
  PretrainOutcome out = cmd_pretrain(cfg, scratch.sub("run"));
  std::cout << "       masked MSE " << out.initial_masked_mse << " -> "
            << out.final_masked_mse << "\n";
  expect(out.final_masked_mse <= 0.5 * out.initial_masked_mse,
         "masked MSE not halved");

  // the loss target reads only masked patches: perturbing every pixel of
  // every visible patch leaves the extracted targets bitwise unchanged
  {
    EncoderConfig ecfg = cfg.encoder;
    MaeModel model(ecfg, 9);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FrameSequence seq;
    seq.t = 1;
    seq.c = 3;
    seq.h = ecfg.image_h;
    seq.w = ecfg.image_w;
    seq.valid_mask = {1};
    seq.pixels.resize(static_cast<size_t>(3 * ecfg.image_h * ecfg.image_w));
    for (double& p : seq.pixels) p = unit(rng);
    MaskSpec mask = sample_mask(ecfg.tokens_per_frame(), cfg.mask_ratio, 7, 1);

    FrameSequence perturbed = seq;
    const auto vis = visible_indices(mask.masked[0], ecfg.tokens_per_frame());
    const int p = ecfg.patch_size;
    for (int64_t vi : vis) {
      const int64_t r = vi / ecfg.grid_cols(), c = vi % ecfg.grid_cols();
      for (int64_t ch = 0; ch < 3; ++ch)
        for (int y = 0; y < p; ++y)
          for (int x = 0; x < p; ++x)
            perturbed.pixels[static_cast<size_t>(
                (ch * ecfg.image_h + r * p + y) * ecfg.image_w + c * p + x)] =
                unit(rng);
    }
    std::vector<Tensor> ta = model.masked_patch_pixels(seq, mask);
    std::vector<Tensor> tb = model.masked_patch_pixels(perturbed, mask);
    bool identical = ta.size() == tb.size();
    for (size_t i = 0; identical && i < ta.size(); ++i)
      identical = ta[i].values() == tb[i].values();
    expect(identical, "visible-patch pixels leaked into the loss targets");

    // consequently a fixed reconstruction scores identically on both
    Tensor recon = random_const(ta[0].rows(), ta[0].cols(), rng);
    expect(masked_mse_loss(recon, ta[0]).scalar() ==
               masked_mse_loss(recon, tb[0]).scalar(),
           "loss moved under visible-patch perturbation");
  }
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 8. ablation configurations
// ---------------------------------------------------------------------------
bool criterion_ablations() {
  Scratch scratch("ablate");
  SyntheticConfig synth;
  synth.num_videos = 2;
  synth.frames_per_video = 8;
  synth.num_aus = 4;
  synth.image_size = 16;
  synth.seed = 77;
  const std::string data_dir = scratch.sub("data");
  generate_synthetic(data_dir, synth);

  RunConfig base = RunConfig::desk_preset();
  base.encoder.image_h = 16;
  base.encoder.image_w = 16;
  base.encoder.patch_size = 8;
  base.encoder.embed_dim = 8;
  base.encoder.encoder_depth = 1;
  base.encoder.decoder_depth = 1;
  base.encoder.num_heads = 1;
  base.stgl.num_blocks = 1;
  base.stgl.k = 2;
  base.num_aus = 4;
  base.batch_size = 2;
  base.optim.total_steps = 5;
  base.optim.warmup_steps = 1;
  base.eval_every = 5;
  base.dataset_root = data_dir;

  RunConfig spatial_only = base;
  spatial_only.stgl.use_temporal = false;
  RunConfig temporal_added = base;  // both branches on
  RunConfig no_stgl = base;
  no_stgl.use_stgl = false;

  struct Variant {
    const char* name;
    RunConfig cfg;
    std::vector<double> scores;
  };
  std::vector<Variant> variants = {{"spatial-only", spatial_only, {}},
                                   {"temporal-added", temporal_added, {}},
                                   {"no-stgl", no_stgl, {}}};

  DataSet data = scan_dataset(data_dir);
  for (auto& v : variants) {
    TrainOutcome out = cmd_train(v.cfg, scratch.sub(v.name));  // must run
    CheckpointData ck = load_checkpoint(out.checkpoint_path);
    AuDetector det = detector_from_checkpoint(ck);
    for (const auto& spec : segment_for_eval(data.videos[0], 0)) {
      LoadedClip clip = load_clip(data.videos[0], spec, v.cfg.encoder, 4);
      AUPredictions pred = det.predict(clip.frames, clip.labels);
      v.scores.insert(v.scores.end(), pred.scores.begin(), pred.scores.end());
    }
  }

  for (size_t a = 0; a < variants.size(); ++a) {
    for (size_t b = a + 1; b < variants.size(); ++b) {
      double diff = 0;
      for (size_t i = 0; i < variants[a].scores.size(); ++i)
        diff = std::max(diff, std::abs(variants[a].scores[i] -
                                       variants[b].scores[i]));
      expect(diff > 1e-9, std::string(variants[a].name) + " vs " +
                              variants[b].name + " produced identical scores");
    }
  }
  return g_subchecks_failed == 0;
}

// ---------------------------------------------------------------------------
// 9. pipeline round-trips
// ---------------------------------------------------------------------------
bool criterion_roundtrips() {
  // segment partition property over every length 1..200
  {
    bool ok = true;
    for (int64_t frames = 1; frames <= 200; ++frames) {
      std::vector<ClipSpec> plan = segment_plan(frames, 0, "v");
      std::vector<int> seen(static_cast<size_t>(frames), 0);
      for (const auto& s : plan) {
        if (s.length != kClipLength) ok = false;
        if (s.pad_count < 0 || s.pad_count >= kClipLength) ok = false;
        for (int64_t t = 0; t < s.real_frames(); ++t) {
          const int64_t idx = s.start_index + t;
          if (idx < 0 || idx >= frames) {
            ok = false;
          } else {
            seen[static_cast<size_t>(idx)]++;
          }
        }
      }
      for (int c : seen)
        if (c != 1) ok = false;
    }
    expect(ok, "segment plans are not an exact partition");
  }

  Scratch scratch("roundtrip");
  SyntheticConfig synth;
  synth.num_videos = 2;
  synth.frames_per_video = 21;  // forces a padded final segment
  synth.num_aus = 4;
  synth.image_size = 16;
  synth.seed = 31;
  const std::string data_dir = scratch.sub("data");
  generate_synthetic(data_dir, synth);

  RunConfig cfg = RunConfig::desk_preset();
  cfg.encoder.image_h = 16;
  cfg.encoder.image_w = 16;
  cfg.encoder.patch_size = 8;
  cfg.encoder.embed_dim = 8;
  cfg.encoder.encoder_depth = 1;
  cfg.encoder.decoder_depth = 1;
  cfg.encoder.num_heads = 1;
  cfg.stgl.num_blocks = 1;
  cfg.stgl.k = 2;
  cfg.num_aus = 4;
  cfg.batch_size = 2;
  cfg.optim.total_steps = 5;
  cfg.optim.warmup_steps = 1;
  cfg.eval_every = 5;
  cfg.dataset_root = data_dir;
  TrainOutcome out = cmd_train(cfg, scratch.sub("run"));

  // predictions scored offline equal the evaluation report
  MetricReport eval_rep = cmd_eval(out.checkpoint_path, data_dir, -1.0);
  const std::string pred_dir = scratch.sub("pred");
  cmd_predict(out.checkpoint_path, data_dir, pred_dir, -1.0);

  DataSet data = scan_dataset(data_dir);
  ConfusionCounts cc;
  cc.reset(4);
  bool parse_ok = true;
  for (size_t vi = 0; vi < data.videos.size(); ++vi) {
    const VideoRecord& rec = data.videos[vi];
    std::ifstream csv(fs::path(pred_dir) / (rec.video_id + ".csv"));
    if (!csv.good()) {
      parse_ok = false;
      continue;
    }
    std::string line;
    std::getline(csv, line);  // header
    AUPredictions p;
    p.num_aus = 4;
    p.au_names = data.au_names;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string field;
      std::getline(row, field, ',');  // frame number
      const int64_t fidx = p.num_frames;
      p.num_frames += 1;
      p.frame_valid.push_back(1);
      for (int64_t i = 0; i < 4; ++i) {
        std::getline(row, field, ',');
        p.scores.push_back(std::stod(field));
        p.labels.push_back(
            rec.labels[static_cast<size_t>(fidx)][static_cast<size_t>(i)]);
      }
    }
    if (p.num_frames != rec.num_frames()) parse_ok = false;
    cc.accumulate(p, 0.5);
  }
  expect(parse_ok, "prediction CSVs missing rows");
  MetricReport offline = cc.report(data.au_names);
  expect(std::abs(offline.average_f1 - eval_rep.average_f1) <= 1e-6,
         "offline rescoring of predictions diverged from evaluation");
  for (size_t i = 0; i < offline.per_au.size(); ++i)
    if (!expect(std::abs(offline.per_au[i].f1 - eval_rep.per_au[i].f1) <= 1e-6,
                "per-AU F1 diverged at index " + std::to_string(i)))
      break;

  // checkpoint round-trip: reload and re-evaluate
  CheckpointData ck = load_checkpoint(out.checkpoint_path);
  AuDetector restored = detector_from_checkpoint(ck);
  MetricReport again = evaluate_dataset(restored, data, cfg.threshold);
  expect(std::abs(again.average_f1 - eval_rep.average_f1) <= 1e-6,
         "reloaded checkpoint evaluates differently");

  const std::string resaved = (fs::path(scratch.sub("run2")) / "re.ckpt").string();
  save_checkpoint(resaved, restored.params(), ck.manifest["config"],
                  ck.manifest["step"], ck.manifest["metrics"]);
  CheckpointData ck2 = load_checkpoint(resaved);
  bool bitwise = ck2.names == ck.names;
  for (const auto& name : ck.names)
    if (bitwise && ck2.tensors.at(name).values != ck.tensors.at(name).values)
      bitwise = false;
  expect(bitwise, "save/load/save drifted");
  return g_subchecks_failed == 0;
}

struct Criterion {
  int id;
  const char* name;
  bool (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "end-to-end gradients match finite differences", criterion_gradients},
      {2, "KNN adjacency matches the brute-force oracle", criterion_knn_oracle},
      {3, "F1 matches brute-force confusion arithmetic", criterion_f1_oracle},
      {4, "structural invariants hold", criterion_invariants},
      {5, "blank padding is inert in losses and metrics", criterion_padding},
      {6, "full model overfits the synthetic set", criterion_overfit},
      {7, "pretraining halves the masked reconstruction error",
       criterion_pretrain},
      {8, "ablation configurations run and differ", criterion_ablations},
      {9, "segmenting, prediction files and checkpoints round-trip",
       criterion_roundtrips},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    g_subchecks_failed = 0;
    bool ok = false;
    std::string error;
    const auto t0 = Clock::now();
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      error = e.what();
      ok = false;
    }
    const double dt = seconds_since(t0);
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name
              << "  (" << std::fixed << std::setprecision(1) << dt << "s)\n";
    std::cout.unsetf(std::ios::fixed);
    if (!error.empty()) std::cout << "       exception: " << error << "\n";
    if (!ok) ++failures;
  }
  if (failures > 0)
    std::cout << failures << " acceptance criteria failed\n";
  else
    std::cout << "all acceptance criteria passed\n";
  return failures == 0 ? 0 : 1;
}

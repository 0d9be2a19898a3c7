#include "augraph/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "augraph/au_graph.hpp"
#include "augraph/check.hpp"
#include "augraph/image_io.hpp"
#include "augraph/logging.hpp"

namespace fs = std::filesystem;

namespace augraph {

namespace {

bool parse_frame_number(const std::string& stem, int64_t* out) {
  if (stem.empty()) return false;
  int64_t v = 0;
  for (char ch : stem) {
    if (ch < '0' || ch > '9') return false;
    v = v * 10 + (ch - '0');
  }
  *out = v;
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

void read_labels_csv(const fs::path& csv_path, VideoRecord* rec,
                     std::vector<std::string>* au_names) {
  std::ifstream in(csv_path);
  AUG_CHECK(in.good(), "video ", rec->video_id, ": cannot open ",
            csv_path.string());
  std::string line;
  AUG_CHECK(static_cast<bool>(std::getline(in, line)), "video ", rec->video_id,
            ": empty labels file");
  std::vector<std::string> header = split_csv_line(line);
  AUG_CHECK(header.size() >= 2 && header[0] == "frame", "video ",
            rec->video_id, ": labels header must start with 'frame,'");
  std::vector<std::string> names(header.begin() + 1, header.end());
  if (au_names->empty())
    *au_names = names;
  else
    AUG_CHECK(*au_names == names, "video ", rec->video_id,
              ": labels header disagrees with other videos");

  const size_t n = names.size();
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    AUG_CHECK(fields.size() == n + 1, "video ", rec->video_id,
              ": labels row has ", fields.size(), " fields, expected ", n + 1);
    AUG_CHECK(row < rec->frame_paths.size(), "video ", rec->video_id,
              ": more label rows than frames");
    int64_t frame_no = -1;
    AUG_CHECK(parse_frame_number(fields[0], &frame_no), "video ",
              rec->video_id, ": bad frame number '", fields[0], "'");
    AUG_CHECK(frame_no == rec->frame_numbers[row], "video ", rec->video_id,
              ": label row ", row, " names frame ", frame_no,
              " but the sorted frame file is ", rec->frame_numbers[row]);
    std::vector<int> values(n);
    for (size_t i = 0; i < n; ++i) {
      int v = 0;
      try {
        v = std::stoi(fields[i + 1]);
      } catch (const std::exception&) {
        throw RuntimeFault("video " + rec->video_id + ": bad label '" +
                           fields[i + 1] + "'");
      }
      AUG_CHECK(v == 0 || v == 1 || v == -1, "video ", rec->video_id,
                ": label must be 0/1/-1, got ", v);
      if (v == -1) rec->has_unannotated = true;
      values[i] = v;
    }
    rec->labels.push_back(std::move(values));
    ++row;
  }
  AUG_CHECK(rec->labels.size() == rec->frame_paths.size(), "video ",
            rec->video_id, ": ", rec->labels.size(), " label rows for ",
            rec->frame_paths.size(), " frames");
  rec->labeled = true;
}

}  // namespace

DataSet scan_dataset(const std::string& root) {
  AUG_CHECK_ARG(fs::is_directory(root), "dataset root ", root,
                " is not a directory");
  DataSet ds;
  ds.root = root;

  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());

  for (const auto& dir : subdirs) {
    VideoRecord rec;
    rec.video_id = dir.filename().string();
    const fs::path frames_dir = dir / "frames";
    AUG_CHECK(fs::is_directory(frames_dir), "video ", rec.video_id,
              ": missing frames/ directory");

    std::vector<std::pair<int64_t, std::string>> frames;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") continue;
      int64_t num = -1;
      AUG_CHECK(parse_frame_number(entry.path().stem().string(), &num),
                "video ", rec.video_id, ": frame file ",
                entry.path().filename().string(), " has a non-numeric name");
      frames.emplace_back(num, entry.path().string());
    }
    AUG_CHECK(!frames.empty(), "video ", rec.video_id, ": no frames found");
    std::sort(frames.begin(), frames.end());
    for (auto& [num, path] : frames) {
      rec.frame_numbers.push_back(num);
      rec.frame_paths.push_back(path);
    }

    const fs::path csv = dir / "labels.csv";
    if (fs::is_regular_file(csv)) {
      read_labels_csv(csv, &rec, &ds.au_names);
      if (rec.has_unannotated)
        AUG_INFO("video ", rec.video_id, " has unannotated (-1) labels");
    } else {
      AUG_INFO("video ", rec.video_id, " has no labels.csv; marked unlabeled");
    }
    ds.videos.push_back(std::move(rec));
  }
  return ds;
}

ClipSpec sample_clip_spec(const VideoRecord& record, int video_index,
                          std::mt19937_64& rng) {
  AUG_CHECK_ARG(record.num_frames() >= 1, "video ", record.video_id,
                " is empty");
  ClipSpec spec;
  spec.video_index = video_index;
  spec.video_id = record.video_id;
  spec.length = kClipLength;
  const int64_t f = record.num_frames();
  if (f >= kClipLength) {
    std::uniform_int_distribution<int64_t> dist(0, f - kClipLength);
    spec.start_index = dist(rng);
    spec.pad_count = 0;
  } else {
    spec.start_index = 0;
    spec.pad_count = kClipLength - f;
  }
  return spec;
}

std::vector<ClipSpec> segment_plan(int64_t num_frames, int video_index,
                                   const std::string& video_id) {
  AUG_CHECK_ARG(num_frames >= 0, "negative frame count");
  std::vector<ClipSpec> plan;
  for (int64_t start = 0; start < num_frames; start += kClipLength) {
    ClipSpec spec;
    spec.video_index = video_index;
    spec.video_id = video_id;
    spec.start_index = start;
    spec.length = kClipLength;
    const int64_t remaining = num_frames - start;
    spec.pad_count = remaining >= kClipLength ? 0 : kClipLength - remaining;
    plan.push_back(spec);
  }
  return plan;
}

std::vector<ClipSpec> segment_for_eval(const VideoRecord& record,
                                       int video_index) {
  return segment_plan(record.num_frames(), video_index, record.video_id);
}

namespace {

void decode_frame_into(const VideoRecord& record, int64_t frame_idx,
                       const EncoderConfig& cfg, FrameSequence* seq,
                       int64_t t) {
  ImageU8 img = read_image(record.frame_paths[static_cast<size_t>(frame_idx)]);
  AUG_CHECK(img.width == cfg.image_w && img.height == cfg.image_h, "video ",
            record.video_id, " frame ", frame_idx, " is ", img.width, "x",
            img.height, ", expected ", cfg.image_w, "x", cfg.image_h);
  AUG_CHECK(cfg.channels == 3, "only 3-channel input is supported");
  for (int64_t ch = 0; ch < 3; ++ch)
    for (int64_t y = 0; y < seq->h; ++y)
      for (int64_t x = 0; x < seq->w; ++x)
        seq->pixels[static_cast<size_t>(((t * 3 + ch) * seq->h + y) * seq->w + x)] =
            img.at(static_cast<int>(y), static_cast<int>(x),
                   static_cast<int>(ch)) /
            255.0;
  seq->valid_mask[static_cast<size_t>(t)] = 1;
}

}  // namespace

LoadedClip load_clip(const VideoRecord& record, const ClipSpec& spec,
                     const EncoderConfig& cfg, int num_aus) {
  AUG_CHECK_ARG(spec.pad_count >= 0 && spec.pad_count < spec.length,
                "pad_count ", spec.pad_count, " out of range");
  AUG_CHECK_ARG(spec.start_index + spec.real_frames() <= record.num_frames(),
                "clip window exceeds video ", record.video_id);

  LoadedClip clip;
  clip.spec = spec;
  FrameSequence& seq = clip.frames;
  seq.t = spec.length;
  seq.c = cfg.channels;
  seq.h = cfg.image_h;
  seq.w = cfg.image_w;
  seq.clip_id = record.video_id + ":" + std::to_string(spec.start_index);
  seq.pixels.assign(static_cast<size_t>(seq.t * seq.c * seq.h * seq.w), 0.0);
  seq.valid_mask.assign(static_cast<size_t>(seq.t), 0);
  clip.labels.assign(static_cast<size_t>(seq.t * num_aus), -1);

  for (int64_t t = 0; t < spec.real_frames(); ++t) {
    const int64_t frame_idx = spec.start_index + t;
    decode_frame_into(record, frame_idx, cfg, &seq, t);
    if (record.labeled) {
      const auto& row = record.labels[static_cast<size_t>(frame_idx)];
      AUG_CHECK(row.size() == static_cast<size_t>(num_aus), "video ",
                record.video_id, " has ", row.size(), " labels per frame, ",
                "expected ", num_aus);
      for (int i = 0; i < num_aus; ++i)
        clip.labels[static_cast<size_t>(t * num_aus + i)] = row[static_cast<size_t>(i)];
    }
  }
  seq.validate();
  return clip;
}

FrameSequence load_single_frame(const VideoRecord& record, int64_t frame_idx,
                                const EncoderConfig& cfg) {
  AUG_CHECK_ARG(frame_idx >= 0 && frame_idx < record.num_frames(),
                "frame index ", frame_idx, " out of range for video ",
                record.video_id);
  FrameSequence seq;
  seq.t = 1;
  seq.c = cfg.channels;
  seq.h = cfg.image_h;
  seq.w = cfg.image_w;
  seq.clip_id = record.video_id + "#" + std::to_string(frame_idx);
  seq.pixels.assign(static_cast<size_t>(seq.c * seq.h * seq.w), 0.0);
  seq.valid_mask.assign(1, 0);
  decode_frame_into(record, frame_idx, cfg, &seq, 0);
  seq.validate();
  return seq;
}

void generate_synthetic(const std::string& root, const SyntheticConfig& cfg) {
  AUG_CHECK_ARG(cfg.num_videos >= 0, "negative video count");
  AUG_CHECK_ARG(cfg.num_aus >= 1 && cfg.num_aus <= 16,
                "synthetic AU count must be 1..16 (grid cells), got ",
                cfg.num_aus);
  AUG_CHECK_ARG(cfg.image_size >= 4 && cfg.image_size % 4 == 0,
                "image_size must be a positive multiple of 4");
  if (cfg.num_videos > 0)
    AUG_CHECK_ARG(cfg.frames_per_video >= 2,
                  "need at least 2 frames per video so every AU can have a "
                  "positive and a negative frame");

  fs::create_directories(root);
  std::mt19937_64 rng(cfg.seed);
  const int cell = cfg.image_size / 4;
  const std::vector<std::string> names = au_names_for(cfg.num_aus);

  for (int v = 0; v < cfg.num_videos; ++v) {
    char vid[32];
    std::snprintf(vid, sizeof(vid), "video%03d", v);
    const fs::path vdir = fs::path(root) / vid;
    const fs::path fdir = vdir / "frames";
    fs::create_directories(fdir);

    // Sticky Markov chain per AU; resample the whole video's label matrix
    // until no AU is constant across frames.
    std::vector<std::vector<int>> states;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      states.assign(static_cast<size_t>(cfg.frames_per_video),
                    std::vector<int>(static_cast<size_t>(cfg.num_aus), 0));
      for (int a = 0; a < cfg.num_aus; ++a) {
        int s = unit(rng) < 0.5 ? 1 : 0;
        for (int f = 0; f < cfg.frames_per_video; ++f) {
          states[static_cast<size_t>(f)][static_cast<size_t>(a)] = s;
          if (unit(rng) >= 0.8) s = 1 - s;
        }
      }
      bool ok = true;
      for (int a = 0; a < cfg.num_aus && ok; ++a) {
        int pos = 0;
        for (int f = 0; f < cfg.frames_per_video; ++f)
          pos += states[static_cast<size_t>(f)][static_cast<size_t>(a)];
        if (pos == 0 || pos == cfg.frames_per_video) ok = false;
      }
      if (ok) break;
      states.clear();
    }
    AUG_CHECK(!states.empty(), "could not sample a balanced label matrix");

    std::ofstream csv(vdir / "labels.csv");
    AUG_CHECK(csv.good(), "cannot write labels for ", vid);
    csv << "frame";
    for (const auto& n : names) csv << "," << n;
    csv << "\n";

    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (int f = 0; f < cfg.frames_per_video; ++f) {
      ImageU8 img;
      img.width = cfg.image_size;
      img.height = cfg.image_size;
      img.pixels.resize(static_cast<size_t>(cfg.image_size) * cfg.image_size * 3);
      for (int y = 0; y < cfg.image_size; ++y) {
        for (int x = 0; x < cfg.image_size; ++x) {
          const int cell_idx = (y / cell) * 4 + (x / cell);
          double base = 0.5;
          if (cell_idx < cfg.num_aus)
            base = states[static_cast<size_t>(f)][static_cast<size_t>(cell_idx)]
                       ? 0.78
                       : 0.22;
          for (int c = 0; c < 3; ++c) {
            double val = std::clamp(base + noise(rng), 0.0, 1.0);
            img.pixels[static_cast<size_t>((y * cfg.image_size + x) * 3 + c)] =
                static_cast<uint8_t>(std::lround(val * 255.0));
          }
        }
      }
      char fname[32];
      std::snprintf(fname, sizeof(fname), "%06d.png", f);
      write_png((fdir / fname).string(), img);

      csv << f;
      for (int a = 0; a < cfg.num_aus; ++a)
        csv << "," << states[static_cast<size_t>(f)][static_cast<size_t>(a)];
      csv << "\n";
    }
  }
}

}  // namespace augraph
